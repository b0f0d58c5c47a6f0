"""Unit tests for surit."""
