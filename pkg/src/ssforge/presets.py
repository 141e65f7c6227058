"""Parameter choices of the seven example surfaces, with default domains."""

from __future__ import annotations

RECT_UNIT = "rect:-1,1,-1,1"
ANNULUS = "annulus:0.4,1.5"
ROT_STRIP = "rect:-1.5,1.5,0,2pi"

PRESETS = {
    "fig1": {"f": "z", "g": "z", "domain": RECT_UNIT},
    "fig2": {"f": "z^2", "g": "z", "domain": RECT_UNIT},
    "fig3": {"f": "z", "g": "z^3", "domain": ANNULUS},
    "fig4": {"f": "z", "g": "z^4", "domain": ANNULUS},
    "fig5": {"a": 1.0, "b": 0.0, "domain": ROT_STRIP},
    "fig6": {"a": 0.0, "b": 0.0, "domain": ROT_STRIP},
    "fig7": {"a": -1.0, "b": 1.0, "domain": ROT_STRIP},
}


def is_rotational(name: str) -> bool:
    return "a" in PRESETS[name]
