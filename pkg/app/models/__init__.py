"""Pydantic schemas for input files, requests and reports."""
