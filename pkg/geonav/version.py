# pylint: disable=invalid-name
"""
The version number of the package.
"""

full_version = "0.1.0"
