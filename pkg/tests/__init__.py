"""polichange test suite."""
