"""Built-in node kinds against independent oracles."""

import math

import numpy as np
import pytest

from streamloom import (
    DuplicateKind,
    ParamError,
    UnknownKey,
    UnknownKind,
    default_registry,
    growth_factor,
    instantiate,
)
from streamloom.metadata import ChannelSpec, StreamMetadata
from streamloom.sources import Frame
from streamloom.transforms import FIXATION, SACCADE, run_transform


def make_meta(channels, freq=50.0, stream_id="s"):
    return StreamMetadata(
        stream_id=stream_id, name=stream_id, frequency_hz=freq,
        channels=tuple(ChannelSpec(*c) for c in channels),
    )


def make_frames(meta, columns):
    """columns: one sequence per channel, all equal length."""
    n = len(columns[0])
    return [
        Frame(meta.stream_id, i, i / meta.frequency_hz,
              tuple(col[i] for col in columns))
        for i in range(n)
    ]


def build(kind_name, params, in_meta):
    kind = default_registry().get(kind_name)
    if isinstance(in_meta, StreamMetadata):
        in_meta = {"in": in_meta}
    return instantiate(kind, params, in_meta)


def out_frames(pairs, port="out"):
    return [f for p, f in pairs if p == port]


class TestSmooth:
    def test_dc_gain_converges_to_constant(self):
        meta = make_meta([("x", "f64")], freq=50.0)
        inst, _ = build("smooth", {}, meta)  # default cutoff 6.25 Hz
        frames = make_frames(meta, [[3.0] * 100])
        out = out_frames(run_transform(inst, frames))
        settled = [f for f in out if f.t >= 5 / 6.25]
        assert settled
        assert all(abs(f.values[0] - 3.0) < 1e-9 for f in settled)

    def test_impulse_response_decays(self):
        meta = make_meta([("x", "f64")], freq=50.0)
        inst, _ = build("smooth", {}, meta)
        frames = make_frames(meta, [[1.0] + [0.0] * 199])
        out = out_frames(run_transform(inst, frames))
        tail = [abs(f.values[0]) for f in out[-20:]]
        assert max(tail) < 1e-8
        energy = sum(f.values[0] ** 2 for f in out)
        assert math.isfinite(energy)

    def test_attenuation_at_ten_times_cutoff(self):
        # analytic magnitude for order 2 at 10x cutoff is ~1/sqrt(1+10^4) ~= 0.01
        fs, cutoff = 1000.0, 10.0
        meta = make_meta([("x", "f64")], freq=fs)
        inst, _ = build("smooth", {"cutoff_hz": cutoff}, meta)
        t = np.arange(5000) / fs
        sig = np.sin(2 * np.pi * 10 * cutoff * t)
        out = out_frames(run_transform(inst, make_frames(meta, [sig.tolist()])))
        steady = [abs(f.values[0]) for f in out if f.t >= 4.0]
        assert max(steady) < 0.05

    def test_metadata_unchanged_and_neutral_volume(self):
        meta = make_meta([("x", "f32"), ("y", "f32"), ("d", "f32")])
        _, out_meta = build("smooth", {}, meta)
        assert out_meta["out"] == meta
        assert growth_factor([meta], [out_meta["out"]]) == 1.0

    def test_cutoff_must_be_below_nyquist(self):
        meta = make_meta([("x", "f64")], freq=50.0)
        with pytest.raises(ParamError, match="cutoff"):
            build("smooth", {"cutoff_hz": 25.0}, meta)

    def test_unknown_param_rejected(self):
        meta = make_meta([("x", "f64")])
        with pytest.raises(ParamError, match="cutoff_freq"):
            build("smooth", {"cutoff_freq": 5.0}, meta)

    def test_label_channels_pass_through(self):
        meta = make_meta([("x", "f64"), ("tag", "label")])
        inst, _ = build("smooth", {}, meta)
        frames = make_frames(meta, [[1.0, 2.0], ["a", "b"]])
        out = out_frames(run_transform(inst, frames))
        assert [f.values[1] for f in out] == ["a", "b"]


def sg_oracle(window_values, times, polyorder, t_eval):
    """Least-squares polynomial fit, derivative at t_eval. Brute force."""
    coeffs = np.polyfit(times, window_values, polyorder)
    deriv = np.polyder(np.poly1d(coeffs))
    return float(deriv(t_eval))


class TestDifferentiate:
    def test_linear_signal_exact(self):
        meta = make_meta([("x", "f64")], freq=50.0)
        inst, _ = build("differentiate", {}, meta)
        t = np.arange(60) / 50.0
        out = out_frames(run_transform(inst, make_frames(meta, [(3 * t + 1).tolist()])))
        assert len(out) == 60 - 6  # warm-up plus lookahead swallow window-1
        assert out[0].t == pytest.approx(3 / 50)  # centered: first center is sample 3
        assert all(abs(f.values[0] - 3.0) < 1e-9 for f in out)

    def test_constant_is_zero(self):
        meta = make_meta([("x", "f64")], freq=50.0)
        inst, _ = build("differentiate", {}, meta)
        out = out_frames(run_transform(inst, make_frames(meta, [[5.5] * 30])))
        assert all(abs(f.values[0]) < 1e-12 for f in out)

    def test_quadratic_at_unit_rate(self):
        meta = make_meta([("x", "f64")], freq=1.0)
        inst, _ = build("differentiate", {}, meta)
        t = np.arange(21, dtype=float)
        out = out_frames(run_transform(inst, make_frames(meta, [(t**2).tolist()])))
        at_ten = [f for f in out if f.t == 10.0][0]
        assert abs(at_ten.values[0] - 20.0) < 1e-9
        window = ((t >= 7) & (t <= 13))
        oracle = sg_oracle(t[window] ** 2, t[window], 2, 10.0)
        assert abs(at_ten.values[0] - oracle) < 1e-9

    def test_random_windows_match_least_squares_oracle(self):
        rng = np.random.default_rng(3)
        meta = make_meta([("x", "f64")], freq=50.0)
        for _ in range(50):
            values = rng.normal(size=7)
            inst, _ = build("differentiate", {}, meta)
            out = out_frames(run_transform(inst, make_frames(meta, [values.tolist()])))
            assert len(out) == 1
            times = np.arange(7) / 50.0
            oracle = sg_oracle(values, times, 2, times[3])
            assert abs(out[0].values[0] - oracle) < 1e-9

    def test_random_polynomials_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            fs = float(rng.uniform(1, 200))
            a, b, c = rng.normal(size=3) * 10
            meta = make_meta([("x", "f64")], freq=fs)
            inst, _ = build("differentiate", {}, meta)
            t = np.arange(30) / fs
            sig = a * t**2 + b * t + c
            out = out_frames(run_transform(inst, make_frames(meta, [sig.tolist()])))
            for f in out:
                assert abs(f.values[0] - (2 * a * f.t + b)) < 1e-9 * max(1, abs(a))

    def test_integer_input_promotes_and_doubles_volume(self):
        meta = make_meta([("x", "i32"), ("y", "i32")])
        _, out_meta = build("differentiate", {}, meta)
        assert all(c.dtype == "f64" for c in out_meta["out"].channels)
        assert growth_factor([meta], [out_meta["out"]]) == pytest.approx(2.0)

    def test_units_become_rates(self):
        meta = make_meta([("x", "f32", "norm")])
        _, out_meta = build("differentiate", {}, meta)
        assert out_meta["out"].channels[0].unit == "norm/s"

    def test_window_validation(self):
        meta = make_meta([("x", "f64")])
        with pytest.raises(ParamError):
            build("differentiate", {"window": 6}, meta)
        with pytest.raises(ParamError):
            build("differentiate", {"window": 7, "polyorder": 7}, meta)

    def test_non_numeric_rejected(self):
        meta = make_meta([("tag", "label")])
        with pytest.raises(ParamError, match="numeric"):
            build("differentiate", {}, meta)


def ivt_oracle(vx, vy, threshold):
    # deliberately plain reimplementation: speed vs threshold, ties up
    labels = []
    for a, b in zip(vx, vy):
        speed = (a * a + b * b) ** 0.5
        labels.append("saccade" if speed >= threshold else "fixation")
    return labels


class TestIvt:
    def velocity_meta(self):
        return make_meta([("vx", "f64", "norm/s"), ("vy", "f64", "norm/s")])

    def test_spec_sequence(self):
        inst, _ = build("ivt_threshold", {}, self.velocity_meta())
        frames = make_frames(self.velocity_meta(), [[10.0, 100.0, 20.0], [0.0, 0.0, 0.0]])
        out = out_frames(run_transform(inst, frames))
        assert [f.values[0] for f in out] == [FIXATION, SACCADE, FIXATION]

    def test_all_zero_is_fixation(self):
        inst, _ = build("ivt_threshold", {}, self.velocity_meta())
        frames = make_frames(self.velocity_meta(), [[0.0] * 10, [0.0] * 10])
        assert all(f.values[0] == FIXATION for f in out_frames(run_transform(inst, frames)))

    def test_tie_is_saccade(self):
        inst, _ = build("ivt_threshold", {}, self.velocity_meta())
        frames = make_frames(self.velocity_meta(), [[48.0], [64.0]])
        out = out_frames(run_transform(inst, frames))
        assert out[0].values == (SACCADE, 80.0)

    def test_ten_thousand_samples_match_oracle(self):
        rng = np.random.default_rng(17)
        n = 10_000
        vx = rng.normal(0, 60, n)
        vy = rng.normal(0, 60, n)
        inst, _ = build("ivt_threshold", {}, self.velocity_meta())
        frames = make_frames(self.velocity_meta(), [vx.tolist(), vy.tolist()])
        got = [f.values[0] for f in out_frames(run_transform(inst, frames))]
        want = ivt_oracle(vx, vy, 80.0)
        assert got == want  # zero mismatches

    def test_units_scale(self):
        inst, _ = build("ivt_threshold", {"units_scale": 2.0}, self.velocity_meta())
        frames = make_frames(self.velocity_meta(), [[30.0, 50.0], [0.0, 0.0]])
        out = out_frames(run_transform(inst, frames))
        assert [f.values[0] for f in out] == [FIXATION, SACCADE]  # 60 < 80 <= 100

    def test_custom_velocity_channels(self):
        meta = make_meta([("x", "f64"), ("y", "f64")])
        inst, _ = build(
            "ivt_threshold", {"velocity_channels": ["x", "y"]}, meta
        )
        out = out_frames(run_transform(inst, make_frames(meta, [[90.0], [0.0]])))
        assert out[0].values[0] == SACCADE

    def test_missing_channels_rejected(self):
        meta = make_meta([("a", "f64")])
        with pytest.raises(ParamError, match="vx"):
            build("ivt_threshold", {}, meta)

    def test_output_frequency_kept_volume_undefined(self):
        meta = self.velocity_meta()
        kind = default_registry().get("ivt_threshold")
        assert kind.volume_data_dependent
        _, out_meta = build("ivt_threshold", {}, meta)
        assert out_meta["out"].frequency_hz == meta.frequency_hz
        assert growth_factor(
            [meta], [out_meta["out"]],
            data_dependent=kind.volume_data_dependent,
        ) is None


class TestMean:
    def test_constant_window_stride_fifty(self):
        meta = make_meta([("v", "f64")])
        inst, _ = build("mean", {}, meta)
        out = out_frames(run_transform(inst, make_frames(meta, [[7.0] * 200])))
        assert len(out) == 4
        assert all(f.values == (7.0,) for f in out)

    def test_first_window_mean(self):
        meta = make_meta([("v", "f64")])
        inst, _ = build("mean", {}, meta)
        values = [float(i) for i in range(1, 51)]
        out = out_frames(run_transform(inst, make_frames(meta, [values])))
        assert len(out) == 1
        assert out[0].values == (25.5,)
        assert out[0].t == pytest.approx(49 / 50)

    def test_stride_below_window(self):
        meta = make_meta([("v", "f64")])
        inst, _ = build("mean", {"window": 50, "stride": 10}, meta)
        out = out_frames(run_transform(inst, make_frames(meta, [[1.0] * 100])))
        # emissions at inputs 50, 60, 70, 80, 90, 100
        assert len(out) == 6

    def test_sliding_window_three(self):
        meta = make_meta([("v", "f64")])
        inst, _ = build("mean", {"window": 3, "stride": 1}, meta)
        out = out_frames(run_transform(inst, make_frames(meta, [[1.0, 2.0, 3.0, 4.0, 5.0]])))
        assert [f.values[0] for f in out] == [2.0, 3.0, 4.0]

    def test_declared_output_frequency(self):
        meta = make_meta([("v", "f64")])
        _, out_meta = build("mean", {}, meta)
        assert out_meta["out"].frequency_hz == 1.0
        assert growth_factor([meta], [out_meta["out"]]) == pytest.approx(0.02)

    def test_param_validation(self):
        meta = make_meta([("v", "f64")])
        with pytest.raises(ParamError, match="stride"):
            build("mean", {"window": 10, "stride": 20}, meta)
        with pytest.raises(ParamError):
            build("mean", {"window": 0}, meta)
        with pytest.raises(ParamError, match="numeric"):
            build("mean", {}, make_meta([("tag", "label")]))

    def test_integer_channels_promote(self):
        meta = make_meta([("v", "i32")])
        _, out_meta = build("mean", {}, meta)
        assert out_meta["out"].channels[0].dtype == "f64"


class TestNoise:
    def test_zero_sigma_is_identity(self):
        meta = make_meta([("x", "f64"), ("y", "f64")])
        inst, _ = build("noise", {"sigma": 0.0}, meta)
        frames = make_frames(meta, [[1.25, 2.5], [0.5, 0.75]])
        out = out_frames(run_transform(inst, frames))
        assert [f.values for f in out] == [f.values for f in frames]

    def test_seed_determinism(self):
        meta = make_meta([("x", "f64")])
        runs = []
        for _ in range(2):
            inst, _ = build("noise", {"sigma": 1.0, "seed": 99}, meta)
            out = out_frames(run_transform(inst, make_frames(meta, [[0.0] * 50])))
            runs.append([f.values for f in out])
        assert runs[0] == runs[1]

    def test_sample_std_concentrates(self):
        meta = make_meta([("x", "f64")])
        inst, _ = build("noise", {"sigma": 1.0, "seed": 7}, meta)
        n = 100_000
        out = out_frames(run_transform(inst, make_frames(meta, [[0.0] * n])))
        std = np.std([f.values[0] for f in out])
        assert 0.99 <= std <= 1.01

    def test_per_channel_sigma_map(self):
        meta = make_meta([("x", "f64"), ("y", "f64")])
        inst, _ = build("noise", {"sigma": {"x": 1.0}, "seed": 1}, meta)
        out = out_frames(run_transform(inst, make_frames(meta, [[0.0] * 20, [5.0] * 20])))
        assert any(f.values[0] != 0.0 for f in out)
        assert all(f.values[1] == 5.0 for f in out)

    def test_noise_on_label_rejected(self):
        meta = make_meta([("tag", "label")])
        with pytest.raises(ParamError, match="non-numeric"):
            build("noise", {"sigma": 1.0}, meta)


def labeled_meta():
    return make_meta([("label", "label"), ("x", "f64"), ("y", "f64")])


def labeled_frames(rows):
    meta = labeled_meta()
    return [
        Frame(meta.stream_id, i, i / 50.0, row) for i, row in enumerate(rows)
    ]


class TestSynthesizer:
    def test_single_fixation_constant_centroid(self):
        inst, _ = build("synthesizer", {}, labeled_meta())
        rows = [(FIXATION, 0.5, 0.5)] * 10
        out = out_frames(run_transform(inst, labeled_frames(rows)))
        assert len(out) == 10
        assert all(f.values == (0.5, 0.5) for f in out)

    def test_saccade_linear_interpolation(self):
        inst, _ = build("synthesizer", {}, labeled_meta())
        rows = (
            [(FIXATION, 0.0, 0.0)] * 3
            + [(SACCADE, 0.1, 0.9)] * 3  # raw path ignored by the model
            + [(FIXATION, 1.0, 1.0)] * 3
        )
        out = out_frames(run_transform(inst, labeled_frames(rows)))
        assert len(out) == 9
        assert [f.values for f in out[:3]] == [(0.0, 0.0)] * 3
        saccade = [f.values for f in out[3:6]]
        assert saccade == [
            (pytest.approx(0.25), pytest.approx(0.25)),
            (pytest.approx(0.5), pytest.approx(0.5)),
            (pytest.approx(0.75), pytest.approx(0.75)),
        ]
        assert [f.values for f in out[6:]] == [(1.0, 1.0)] * 3

    def test_noisy_fixation_positions_average_to_centroid(self):
        inst, _ = build("synthesizer", {}, labeled_meta())
        rows = [(FIXATION, 0.4, 0.6), (FIXATION, 0.6, 0.4), (FIXATION, 0.5, 0.5)]
        out = out_frames(run_transform(inst, labeled_frames(rows)))
        assert all(
            f.values == (pytest.approx(0.5), pytest.approx(0.5)) for f in out
        )

    def test_one_run_lookahead_holds_saccade(self):
        inst, _ = build("synthesizer", {}, labeled_meta())
        rows = (
            [(FIXATION, 0.0, 0.0)] * 3
            + [(SACCADE, 0.0, 0.0)] * 2
            + [(FIXATION, 1.0, 1.0)] * 2  # still open: no emissions for it yet
        )
        emitted = []
        for frame in labeled_frames(rows):
            emitted.extend(inst.process("in", frame))
        assert len(emitted) == 3  # only the first fixation resolved so far
        emitted.extend(inst.finish())
        assert len(emitted) == 7

    def test_leading_saccade_passes_through(self):
        inst, _ = build("synthesizer", {}, labeled_meta())
        rows = [(SACCADE, 0.9, 0.8), (SACCADE, 0.7, 0.6), (FIXATION, 0.5, 0.5)]
        out = out_frames(run_transform(inst, labeled_frames(rows)))
        assert out[0].values == (0.9, 0.8)
        assert out[1].values == (0.7, 0.6)
        assert out[2].values == (0.5, 0.5)

    def test_trailing_saccade_passes_through(self):
        inst, _ = build("synthesizer", {}, labeled_meta())
        rows = [(FIXATION, 0.5, 0.5)] * 2 + [(SACCADE, 0.1, 0.2)]
        out = out_frames(run_transform(inst, labeled_frames(rows)))
        assert out[-1].values == (0.1, 0.2)

    def test_jitter_seed_determinism(self):
        rows = [(FIXATION, 0.5, 0.5)] * 20
        results = []
        for _ in range(2):
            inst, _ = build("synthesizer", {"jitter": 0.02, "seed": 4}, labeled_meta())
            out = out_frames(run_transform(inst, labeled_frames(rows)))
            results.append([f.values for f in out])
        assert results[0] == results[1]
        spread = np.std([v[0] for v in results[0]])
        assert 0 < spread < 0.1

    def test_timestamps_and_count_preserved(self):
        inst, _ = build("synthesizer", {}, labeled_meta())
        rows = (
            [(FIXATION, 0.2, 0.2)] * 4
            + [(SACCADE, 0.0, 0.0)] * 2
            + [(FIXATION, 0.8, 0.8)] * 4
        )
        frames = labeled_frames(rows)
        out = out_frames(run_transform(inst, frames))
        assert [f.t for f in out] == [f.t for f in frames]
        assert [f.seq for f in out] == list(range(len(frames)))

    def test_requires_label_xy(self):
        with pytest.raises(ParamError, match="label"):
            build("synthesizer", {}, make_meta([("x", "f64"), ("y", "f64")]))


def weather_meta():
    return make_meta(
        [("type", "label"), ("value", "f64")], freq=1.0, stream_id="weather"
    )


WEATHER_TYPES = ["temperature", "dew point", "humidity", "wind speed"]


class TestRouter:
    def build_router(self):
        return build(
            "router", {"key": "type", "values": WEATHER_TYPES}, weather_meta()
        )

    def test_routes_by_value_and_preserves_count(self):
        rng = np.random.default_rng(5)
        kinds = rng.choice(WEATHER_TYPES, size=200)
        inst, _ = self.build_router()
        frames = make_frames(
            weather_meta(), [kinds.tolist(), rng.normal(size=200).tolist()]
        )
        pairs = run_transform(inst, frames)
        assert len(pairs) == 200
        for port, frame in pairs:
            assert port in WEATHER_TYPES
            assert len(frame.values) == 1
        counts = {p: sum(1 for q, _ in pairs if q == p) for p in WEATHER_TYPES}
        assert sum(counts.values()) == 200

    def test_port_metadata_drops_key_and_divides_frequency(self):
        _, out_meta = self.build_router()
        assert set(out_meta) == set(WEATHER_TYPES) | {"overflow"}
        port = out_meta["temperature"]
        assert port.channel_names == ("value",)
        assert port.frequency_hz == pytest.approx(0.25)

    def test_unseen_value_goes_to_overflow(self):
        inst, _ = self.build_router()
        frames = make_frames(weather_meta(), [["pressure"], [1013.0]])
        pairs = run_transform(inst, frames)
        assert pairs[0][0] == "overflow"

    def test_single_type_input_uses_one_port(self):
        inst, _ = self.build_router()
        frames = make_frames(weather_meta(), [["humidity"] * 10, [50.0] * 10])
        ports = {p for p, _ in run_transform(inst, frames)}
        assert ports == {"humidity"}

    def test_unknown_key_rejected(self):
        with pytest.raises(UnknownKey):
            build("router", {"key": "city", "values": ["a"]}, weather_meta())

    def test_per_port_seq_independent(self):
        inst, _ = self.build_router()
        frames = make_frames(
            weather_meta(),
            [["temperature", "humidity", "temperature"], [1.0, 2.0, 3.0]],
        )
        pairs = run_transform(inst, frames)
        temp = [f.seq for p, f in pairs if p == "temperature"]
        assert temp == [0, 1]


class TestJoin:
    def metas(self):
        labels = make_meta([("label", "label"), ("v", "f64")], stream_id="lab")
        positions = make_meta([("x", "f64"), ("y", "f64")], stream_id="pos")
        return labels, positions

    def join_params(self):
        return {
            "inputs": ["labels", "positions"],
            "select": {
                "label": "labels/label",
                "x": "positions/x",
                "y": "positions/y",
            },
            "window": 0.5,
        }

    def test_aligned_ports_pair_exactly(self):
        labels, positions = self.metas()
        kind = default_registry().get("join")
        inst, out_meta = instantiate(
            kind, self.join_params(), {"labels": labels, "positions": positions}
        )
        assert out_meta["out"].channel_names == ("label", "x", "y")
        out = []
        for i in range(10):
            t = i / 50.0
            out.extend(inst.process("positions", Frame("pos", i, t, (t, -t))))
            out.extend(
                inst.process("labels", Frame("lab", i, t, (FIXATION if i % 2 else SACCADE, 1.0)))
            )
        frames = out_frames(out)
        assert len(frames) == 10
        for i, f in enumerate(frames):
            t = i / 50.0
            assert f.values == ((FIXATION if i % 2 else SACCADE), t, -t)

    def test_stale_port_contributes_none(self):
        labels, positions = self.metas()
        kind = default_registry().get("join")
        inst, _ = instantiate(
            kind, self.join_params(), {"labels": labels, "positions": positions}
        )
        inst.process("positions", Frame("pos", 0, 0.0, (1.0, 1.0)))
        out = []
        for i in range(60):
            t = i / 50.0
            out.extend(inst.process("labels", Frame("lab", i, t, (FIXATION, 0.0))))
        frames = out_frames(out)
        assert frames[0].values[1] == 1.0
        assert frames[-1].values[1] is None  # positions went stale

    def test_bad_select_rejected(self):
        labels, positions = self.metas()
        kind = default_registry().get("join")
        params = self.join_params()
        params["select"] = {"x": "positions/nope"}
        with pytest.raises(ParamError, match="nope"):
            instantiate(kind, params, {"labels": labels, "positions": positions})


class TestThrottle:
    def test_exact_long_run_rate(self):
        meta = make_meta([("x", "f64")], freq=50.0)
        inst, _ = build("throttle", {"rate_hz": 30.0}, meta)
        frames = make_frames(meta, [[0.0] * 500])  # 10 s of stream time
        out = out_frames(run_transform(inst, frames))
        assert len(out) == 300

    def test_declared_metadata_unchanged(self):
        meta = make_meta([("x", "f64")], freq=50.0)
        _, out_meta = build("throttle", {"rate_hz": 30.0}, meta)
        assert out_meta["out"].frequency_hz == 50.0

    def test_cap_above_input_passes_everything(self):
        meta = make_meta([("x", "f64")], freq=50.0)
        inst, _ = build("throttle", {"rate_hz": 100.0}, meta)
        out = out_frames(run_transform(inst, make_frames(meta, [[0.0] * 100])))
        assert len(out) == 100

    def test_values_pass_untouched(self):
        meta = make_meta([("x", "f64")], freq=50.0)
        inst, _ = build("throttle", {"rate_hz": 10.0}, meta)
        frames = make_frames(meta, [list(np.arange(100.0))])
        out = out_frames(run_transform(inst, frames))
        emitted = {f.values[0] for f in out}
        assert emitted <= {f.values[0] for f in frames}
        assert len(out) == 20

    def test_requires_rate(self):
        meta = make_meta([("x", "f64")])
        with pytest.raises(ParamError):
            build("throttle", {}, meta)


class TestRegistry:
    def test_duplicate_rejected(self):
        registry = default_registry().clone()
        with pytest.raises(DuplicateKind):
            registry.register("mean", lambda *a: None, lambda *a: None)

    def test_unknown_kind(self):
        with pytest.raises(UnknownKind, match="no_such"):
            default_registry().get("no_such")

    def test_instantiate_rewrites_stream_ids(self):
        meta = make_meta([("v", "f64")])
        kind = default_registry().get("mean")
        _, out_meta = instantiate(kind, {}, {"in": meta}, node_id="avg1")
        assert out_meta["out"].stream_id == "avg1/out"

    def test_clone_isolates_registrations(self):
        registry = default_registry().clone()
        registry.register(
            "decimator2",
            lambda p, im, om: None,
            lambda im, p: {"out": im["in"].replace(frequency_hz=im["in"].frequency_hz / 2)},
        )
        assert "decimator2" in registry
        assert "decimator2" not in default_registry()
        meta = make_meta([("v", "f64")], freq=50.0)
        out = registry.get("decimator2").metadata_fn({"in": meta}, {})
        assert out["out"].frequency_hz == 25.0


class TestConformance:
    """Observed output frames must match declared metadata for every kind."""

    def fixtures(self):
        gaze = make_meta([("x", "f64"), ("y", "f64")])
        velocity = make_meta([("vx", "f64"), ("vy", "f64")])
        rng = np.random.default_rng(23)
        n = 400
        cases = {
            "inlet": ({}, gaze, make_frames(gaze, [rng.normal(size=n).tolist(), rng.normal(size=n).tolist()])),
            "smooth": ({}, gaze, make_frames(gaze, [rng.normal(size=n).tolist(), rng.normal(size=n).tolist()])),
            "differentiate": ({}, gaze, make_frames(gaze, [rng.normal(size=n).tolist(), rng.normal(size=n).tolist()])),
            "ivt_threshold": ({}, velocity, make_frames(velocity, [rng.normal(0, 80, n).tolist(), rng.normal(0, 80, n).tolist()])),
            "mean": ({"window": 10, "stride": 10}, gaze, make_frames(gaze, [rng.normal(size=n).tolist(), rng.normal(size=n).tolist()])),
            "noise": ({"sigma": 0.5, "seed": 0}, gaze, make_frames(gaze, [rng.normal(size=n).tolist(), rng.normal(size=n).tolist()])),
            "synthesizer": ({}, labeled_meta(), labeled_frames(
                [(FIXATION if (i // 20) % 2 else SACCADE, float(i % 7), float(i % 5)) for i in range(n)]
            )),
            "router": (
                {"key": "type", "values": WEATHER_TYPES},
                weather_meta(),
                make_frames(weather_meta(), [rng.choice(WEATHER_TYPES, n).tolist(), rng.normal(size=n).tolist()]),
            ),
        }
        return cases

    def type_ok(self, dtype, value):
        if value is None:
            return True
        if dtype in ("f32", "f64"):
            return isinstance(value, float)
        if dtype == "label":
            return isinstance(value, str)
        if dtype == "bool":
            return isinstance(value, bool)
        return isinstance(value, int) and not isinstance(value, bool)

    def test_every_kind_conforms(self):
        registry = default_registry()
        for name, (params, meta, frames) in self.fixtures().items():
            kind = registry.get(name)
            inst, out_meta = instantiate(kind, params, {"in": meta})
            pairs = run_transform(inst, frames)
            by_port = {}
            for port, frame in pairs:
                by_port.setdefault(port, []).append(frame)
            for port, emitted in by_port.items():
                declared = out_meta[port]
                for frame in emitted:
                    assert len(frame.values) == len(declared.channels), name
                    for spec, value in zip(declared.channels, frame.values):
                        assert self.type_ok(spec.dtype, value), (name, spec, value)
                seqs = [f.seq for f in emitted]
                assert seqs == sorted(seqs), name
                times = [f.t for f in emitted]
                assert times == sorted(times), name
                # declared rate vs observed rate over the span, where the
                # kind's output volume is statically declared
                if not kind.volume_data_dependent and len(emitted) > 10:
                    span = emitted[-1].t - emitted[0].t
                    observed = (len(emitted) - 1) / span
                    assert observed == pytest.approx(declared.frequency_hz, rel=0.05), name
