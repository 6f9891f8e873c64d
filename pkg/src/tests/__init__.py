"""Test package for finite-gamma."""
