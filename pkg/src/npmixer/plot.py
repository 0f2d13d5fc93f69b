"""Standalone SVG line plot of history plus forecast, one panel per channel."""
from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

PANEL_W, PANEL_H, MARGIN = 640, 160, 40
COLORS = {"history": "#1f77b4", "forecast": "#d62728"}


def _polyline(parent, xs, ys, color):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    ET.SubElement(parent, "polyline", points=pts, fill="none", stroke=color,
                  **{"stroke-width": "1.5"})


def forecast_svg(history: np.ndarray, forecast: np.ndarray, names, path) -> None:
    """``history [C, L]`` and ``forecast [C, H]`` in original units."""
    C, L = history.shape
    H = forecast.shape[1]
    width = PANEL_W + 2 * MARGIN
    height = C * (PANEL_H + MARGIN) + MARGIN
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width),
                     height=str(height), viewBox=f"0 0 {width} {height}")
    total = L + H
    for c in range(C):
        top = MARGIN + c * (PANEL_H + MARGIN)
        values = np.concatenate([history[c], forecast[c]])
        lo, hi = float(values.min()), float(values.max())
        span = hi - lo or 1.0

        def sx(i):
            return MARGIN + PANEL_W * i / max(total - 1, 1)

        def sy(v):
            return top + PANEL_H * (1.0 - (v - lo) / span)

        g = ET.SubElement(svg, "g")
        ET.SubElement(g, "rect", x=str(MARGIN), y=str(top), width=str(PANEL_W),
                      height=str(PANEL_H), fill="none", stroke="#888")
        ET.SubElement(g, "text", x=str(MARGIN), y=str(top - 6),
                      **{"font-size": "12", "font-family": "sans-serif"}).text = str(names[c])
        ET.SubElement(g, "text", x=str(MARGIN - 4), y=f"{top + 10:.1f}", **{
            "font-size": "9", "text-anchor": "end"}).text = f"{hi:.3g}"
        ET.SubElement(g, "text", x=str(MARGIN - 4), y=f"{top + PANEL_H:.1f}", **{
            "font-size": "9", "text-anchor": "end"}).text = f"{lo:.3g}"
        _polyline(g, [sx(i) for i in range(L)], [sy(v) for v in history[c]], COLORS["history"])
        # forecast starts from the last observed point so the two lines join
        fx = [sx(i) for i in range(L - 1, total)]
        fy = [sy(history[c, -1])] + [sy(v) for v in forecast[c]]
        _polyline(g, fx, fy, COLORS["forecast"])
    legend = ET.SubElement(svg, "g", **{"font-size": "11", "font-family": "sans-serif"})
    for i, (label, color) in enumerate(COLORS.items()):
        x = width - MARGIN - 160 + i * 80
        ET.SubElement(legend, "line", x1=str(x), y1="14", x2=str(x + 18), y2="14", stroke=color,
                      **{"stroke-width": "2"})
        ET.SubElement(legend, "text", x=str(x + 22), y="18").text = label
    ET.ElementTree(svg).write(path, encoding="utf-8", xml_declaration=True)
