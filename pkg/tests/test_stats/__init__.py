"""Tests for the stats module."""
