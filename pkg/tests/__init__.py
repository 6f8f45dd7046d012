"""Tests for mcp-cfrit-crunchtools."""
