"""shipped edge-list datasets."""
