"""Test package for surit."""
