"""sepsim: switchable electro-permanent magnet actuator and robot simulator."""

__version__ = "0.1.0"
