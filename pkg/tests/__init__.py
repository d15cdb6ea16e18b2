"""
Test suite for the flat-connection workbench
"""
