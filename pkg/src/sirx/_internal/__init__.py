"""internal modules for sirx."""
