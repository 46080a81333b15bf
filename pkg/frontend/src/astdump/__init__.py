"""Dump Python ASTs as JSON documents."""
