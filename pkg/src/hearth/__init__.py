"""hearth: a smart-home monitoring gateway runnable against virtual hardware."""

__version__ = "0.1.0"
