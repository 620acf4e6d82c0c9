"""lamlen - intersection lengths of random geodesics with maximal laminations"""

__version__ = "0.1.0"
