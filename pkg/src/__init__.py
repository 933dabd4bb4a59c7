# Routing Game Analysis Package
__version__ = "1.0.0"
__author__ = "Routing Analysis Team"
