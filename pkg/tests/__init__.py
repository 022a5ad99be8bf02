"""Test suite for the blowup-dynamics package."""
