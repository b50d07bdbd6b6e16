"""tests for sirx."""
