"""Tests for the segmentation module."""
