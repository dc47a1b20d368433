# Unit tests for src.services
