"""Test suite for the Kempf cones engine."""
