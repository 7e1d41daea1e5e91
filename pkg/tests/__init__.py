"""
Test package for the condbell toolkit.
"""
