"""
LQG feedback coding for the Gaussian broadcast channel.
"""

__version__ = '0.1.0'
