"""
Harness: checkpoint serialization, evaluation protocol and the K ablation sweep.
"""
