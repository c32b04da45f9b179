"""Tests for the report module."""
