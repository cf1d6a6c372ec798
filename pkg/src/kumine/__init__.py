"""Knowledge-unit mining and long-time-contributor prediction for Java projects."""

__version__ = "0.1.0"
