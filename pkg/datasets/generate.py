"""Regenerate the bundled synthetic datasets in place.

Two small corpora ship with the repo so the demos, the CLI, and the
dashboard have something to replay out of the box:

  synthetic-gaze     2 subjects x 2 tasks of fixation/saccade eye traces,
                     channels x,y (normalized) and d (pupil mm) at 50 Hz,
                     with an explicit t column.
  synthetic-weather  one year of daily metrics for 2 cities in long format
                     (type,value), declared 1 Hz for replay, t = day index.

Everything is seeded; rerunning this script reproduces the exact files.
Usage: python3 datasets/generate.py
"""

import json
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent

GAZE_RATE = 50.0
GAZE_SECONDS = 10.0
SUBJECTS = ("s01", "s02")
TASKS = ("scan", "read")

WEATHER_DAYS = 365
CITIES = ("harborview", "millbrook")
METRICS = ("temperature", "dew_point", "humidity", "wind_speed")


def gaze_trace(rng, n):
    """Fixations with gaussian jitter, joined by short linear saccades."""
    xs = np.empty(n)
    ys = np.empty(n)
    cx, cy = rng.uniform(0.2, 0.8, size=2)
    i = 0
    while i < n:
        hold = int(rng.integers(10, 31))
        for _ in range(min(hold, n - i)):
            xs[i] = cx + rng.normal(0, 0.002)
            ys[i] = cy + rng.normal(0, 0.002)
            i += 1
        if i >= n:
            break
        nx, ny = rng.uniform(0.1, 0.9, size=2)
        hop = int(rng.integers(2, 5))
        for k in range(1, min(hop, n - i) + 1):
            f = k / (hop + 1)
            xs[i] = cx + (nx - cx) * f
            ys[i] = cy + (ny - cy) * f
            i += 1
        cx, cy = nx, ny
    return np.clip(xs, 0.0, 1.0), np.clip(ys, 0.0, 1.0)


def write_gaze(root: Path) -> None:
    doc = {
        "dataset_id": "synthetic-gaze",
        "ownership": {
            "authors": ["streamloom maintainers"],
            "contact": "maintainers@streamloom.invalid",
            "license": "CC0",
        },
        "identification": {
            "title": "Synthetic gaze recordings",
            "version": "1.0",
            "keywords": ["gaze", "synthetic", "fixture"],
            "description": "Seeded fixation/saccade traces for demos and tests.",
        },
        "provenance": "synthesized by datasets/generate.py",
        "groups": {"session": ["subject", "task"]},
        "streams": [
            {
                "stream_id": "gaze/{subject}/{task}",
                "name": "gaze",
                "frequency_hz": GAZE_RATE,
                "channels": [
                    {"name": "x", "dtype": "f32", "unit": "norm"},
                    {"name": "y", "dtype": "f32", "unit": "norm"},
                    {"name": "d", "dtype": "f32", "unit": "mm"},
                ],
            }
        ],
        "resolver": {
            "kind": "declarative",
            "file_pattern": "sub-{subject}/{task}.csv",
            "format": "csv",
        },
    }
    (root / "synthetic-gaze.dataset.json").write_text(
        json.dumps(doc, indent=2) + "\n"
    )
    n = int(GAZE_RATE * GAZE_SECONDS)
    for si, subject in enumerate(SUBJECTS):
        for ti, task in enumerate(TASKS):
            rng = np.random.default_rng(1000 + 10 * si + ti)
            xs, ys = gaze_trace(rng, n)
            t = np.arange(n) / GAZE_RATE
            d = 4.0 + 0.3 * np.sin(2 * np.pi * 0.1 * t) + rng.normal(0, 0.02, n)
            out = root / f"sub-{subject}" / f"{task}.csv"
            out.parent.mkdir(parents=True, exist_ok=True)
            with out.open("w") as fh:
                fh.write("t,x,y,d\n")
                for i in range(n):
                    fh.write(f"{float(t[i])!r},{xs[i]:.6f},{ys[i]:.6f},{d[i]:.4f}\n")


def write_weather(root: Path) -> None:
    doc = {
        "dataset_id": "synthetic-weather",
        "ownership": {
            "authors": ["streamloom maintainers"],
            "contact": "maintainers@streamloom.invalid",
            "license": "CC0",
        },
        "identification": {
            "title": "Synthetic daily weather",
            "version": "1.0",
            "keywords": ["weather", "synthetic", "fixture"],
            "description": "One seeded year of daily metrics per city, "
                           "long format, replayed at 1 Hz (one day per second).",
        },
        "provenance": "synthesized by datasets/generate.py",
        "groups": {"location": ["city"]},
        "streams": [
            {
                "stream_id": "weather/{city}",
                "name": "weather",
                "frequency_hz": 1.0,
                "channels": [
                    {"name": "type", "dtype": "label", "unit": ""},
                    {"name": "value", "dtype": "f32", "unit": ""},
                ],
            }
        ],
        "resolver": {
            "kind": "declarative",
            "file_pattern": "{city}.csv",
            "format": "csv",
        },
    }
    (root / "synthetic-weather.dataset.json").write_text(
        json.dumps(doc, indent=2) + "\n"
    )
    for ci, city in enumerate(CITIES):
        rng = np.random.default_rng(2000 + ci)
        day = np.arange(WEATHER_DAYS)
        phase = rng.uniform(0, 2 * np.pi)
        temp = 12 + 11 * np.sin(2 * np.pi * day / 365 + phase) + rng.normal(0, 1.5, WEATHER_DAYS)
        dew = temp - rng.uniform(2, 6, WEATHER_DAYS)
        humid = np.clip(65 + 18 * np.sin(2 * np.pi * day / 365 + phase + 2.1)
                        + rng.normal(0, 5, WEATHER_DAYS), 20, 100)
        wind = np.abs(rng.normal(0, 3, WEATHER_DAYS)) + 1.5
        series = {"temperature": temp, "dew_point": dew,
                  "humidity": humid, "wind_speed": wind}
        with (root / f"{city}.csv").open("w") as fh:
            fh.write("t,type,value\n")
            for d in day:
                for metric in METRICS:
                    fh.write(f"{float(d)!r},{metric},{series[metric][d]:.2f}\n")


def main() -> None:
    gaze = HERE / "synthetic-gaze"
    weather = HERE / "synthetic-weather"
    gaze.mkdir(exist_ok=True)
    weather.mkdir(exist_ok=True)
    write_gaze(gaze)
    write_weather(weather)
    print(f"wrote {gaze} and {weather}")


if __name__ == "__main__":
    main()
