#!/usr/bin/env python3
"""Regenerates the desk-case forecast/realized CSVs in configs/.

Deterministic closed-form profiles: two daily cycles plus a lookahead tail,
wind-rich nights against 23-41 GW demand so the frequency constraints bind
where they should. Variants scale the wind column for the capacity sweep.
"""
import math
import os

HOURS = 54
BASE = os.path.join(os.path.dirname(__file__), "..", "configs")


def demand_forecast(h):
    hd = h % 24
    scale = 1.03 if h >= 24 else 1.0
    v = 31500 - 8000 * math.cos(2 * math.pi * (hd - 3) / 24) + 1500 * math.sin(4 * math.pi * hd / 24)
    return scale * v


def wind_forecast(h):
    hd = h % 24
    v = 13000 + 5500 * math.cos(2 * math.pi * hd / 24) + 800 * math.sin(2 * math.pi * hd / 7.3)
    return min(max(v, 500.0), 19500.0)


def demand_realized(h):
    return demand_forecast(h) + 400 * math.sin(1.9 * h + 0.7)


def wind_realized(h):
    v = wind_forecast(h) + 1100 * math.sin(1.3 * h + 2.1) + 700 * math.cos(0.7 * h)
    return min(max(v, 0.0), 20000.0)


def write(path, rows):
    with open(path, "w") as f:
        f.write("hour,demand_mw,wind_mw\n")
        for h, d, w in rows:
            f.write(f"{h},{d:.1f},{w:.1f}\n")


def main():
    os.makedirs(BASE, exist_ok=True)
    fc = [(h, demand_forecast(h), wind_forecast(h)) for h in range(HOURS)]
    rz = [(h, demand_realized(h), wind_realized(h)) for h in range(HOURS)]
    write(os.path.join(BASE, "desk_forecast.csv"), fc)
    write(os.path.join(BASE, "desk_realized.csv"), rz)
    write(os.path.join(BASE, "desk_forecast_w0.csv"), [(h, d, 0.0) for h, d, _ in fc])
    write(os.path.join(BASE, "desk_realized_w0.csv"), [(h, d, 0.0) for h, d, _ in rz])
    write(os.path.join(BASE, "desk_forecast_w40.csv"), [(h, d, min(2 * w, 39500.0)) for h, d, w in fc])
    write(os.path.join(BASE, "desk_realized_w40.csv"), [(h, d, min(2 * w, 39500.0)) for h, d, w in rz])
    print("wrote desk CSVs to", BASE)


if __name__ == "__main__":
    main()
