"""flowmap: design-to-code security compliance workbench."""

__version__ = "0.1.0"
