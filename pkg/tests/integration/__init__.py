"""Integration tests for surit."""
