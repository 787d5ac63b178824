"""Built-in named inputs, file loading and report rendering."""
