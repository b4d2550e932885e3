"""Tests for supergrade."""
