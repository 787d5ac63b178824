"""HTTP endpoints for the report operations."""
