"""
Integration tests for nibblegemm.

These tests run the full benchmark grid and whole-network workflows and take
longer than the unit suite.
"""
