# Tests for AI Legal Reasoning System
