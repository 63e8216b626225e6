"""Tests for knockoffkit."""
