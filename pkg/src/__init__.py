"""Verification toolkit for q-deformed isometry systems."""
