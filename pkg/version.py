__version__ = "0.3.0"
__schema_version__ = "1.0.0"

LIBRARY_VERSION = __version__
SCHEMA_VERSION = __schema_version__
