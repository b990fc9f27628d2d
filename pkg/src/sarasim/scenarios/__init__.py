"""Shipped scenario files for the camcorder test cases."""
