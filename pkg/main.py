#!/usr/bin/env python3
"""
A-LIIF super-resolution - Main Entry Point

Usage:
    python main.py train configs/desk.cfg
    python main.py upscale runs/desk.ckpt in.png out.png --scale 2.5
    python main.py eval runs/desk.ckpt data/toy/val --scales in,out --ssim
    python main.py ablate-k configs/desk.cfg --k-list 1,2,4
    python main.py make-toy-set data/toy
"""

import sys
from pathlib import Path

# Ensure project root is in path
PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.cli.commands import run

if __name__ == "__main__":
    sys.exit(run())
