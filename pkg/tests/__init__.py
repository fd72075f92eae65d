"""Tests for quorum-allpairs."""
