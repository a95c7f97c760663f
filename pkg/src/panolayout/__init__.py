"""Room layout and object pose estimation from a single indoor panorama."""

__version__ = "0.1.0"
