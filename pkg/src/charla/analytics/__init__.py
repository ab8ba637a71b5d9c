"""Offline analysis of exported conversation logs."""
