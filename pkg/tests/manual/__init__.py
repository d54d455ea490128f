"""
Manual tests for development and debugging.
"""
