"""Tests for the seasonal module."""
