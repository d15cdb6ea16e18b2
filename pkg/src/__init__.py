"""
Flat-connection workbench
Symbolic and numeric tools for flat SL(n) h-connections and their WKB analysis
"""

__version__ = "0.1.0"
