# Integration tests (require DB/env when needed)
