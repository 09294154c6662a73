"""Test suite for meshtrend."""
