import json

import numpy as np
import pytest

from curvn.conformal import InversionMap, invert_curve
from curvn.curves import (Circle, Ellipse, FourierLoop, Line, OpenBump, fit_spline,
                          reparameterize, reverse, rotate, translate)
from curvn.photon import Inertial, Moved, Wiggle, boost
from curvn.specio import JobSpec, SpecError, parse_spec, schema, serialize

CURVES = [
    Circle([0.5, -1.0], 2.0),
    Ellipse(1.5, 0.7, [0.1, 0.2], 0.3),
    Line([0.0, 1.0], [1.0, 2.0]),
    FourierLoop([[1.0, 0.0], [0.1, 0.05]], [[0.0, 1.0], [0.0, 0.1 / 3]]),
    OpenBump(0.7, 1.3),
    fit_spline([[1, 0], [0, 1.2], [-1, 0], [0, -0.8]]),
    fit_spline([[0, 0], [1, 0.5], [2, 0.5], [3, 0]], closed=False),
    translate(rotate(Circle(), 0.4), [1.0, 1.0]),
    reverse(reparameterize(Ellipse(1.0, 0.5), 0.3, 2)),
    invert_curve(Circle(), InversionMap([3.0, 0.0], 1.1)),
]
WORLDLINES = [
    Inertial([0.1, 0.0, -0.2], [1.0, 2.0, 3.0]),
    Wiggle(0.02, 0.5, 30.0, [0.0, 1.0, 0.0]),
    Wiggle(detune=0.01),
    boost(Wiggle(), [0.5, 0.0, 0.0]),
    Moved(Wiggle(), np.eye(3)[[1, 0, 2]] * [1, -1, 1], 2.0, [1.0, 0.0, 0.0]),
]


@pytest.mark.parametrize("obj", CURVES + WORLDLINES, ids=lambda o: o.kind)
def test_round_trip(obj):
    text = serialize(obj)
    again = parse_spec(text)
    assert type(again) is type(obj)
    assert serialize(again) == text
    if hasattr(obj, "closed"):
        s = np.array([0.3, 1.1, 2.5])
        for p, q in zip(obj.eval(s), again.eval(s)):
            assert np.array_equal(p, q)


def test_floats_survive_exactly():
    c = Circle([0.1 + 0.2, 1 / 3], np.pi)
    again = parse_spec(serialize(c))
    assert again.radius == np.pi and np.array_equal(again.center, c.center)


def test_minimal_documents():
    assert parse_spec('{"kind":"circle","radius":1}').radius == 1.0
    assert parse_spec('{"kind":"ellipse","ecc":0.5}').ecc == 0.5


@pytest.mark.parametrize("text, field, words", [
    ('{"kind":"ellipse","a":1,"ecc":1.2}', "ecc", "[0, 1)"),
    ('{"kind":"circle","radius":1,"color":"red"}', "color", "unknown"),
    ('{"kind":"circle","radius":0}', "radius", "(0, inf)"),
    ('{"kind":"boosted","base":{"kind":"inertial"},"beta":[0.9,0.9,0]}', "beta", "[0, 1)"),
    ('{"kind":"similarity","base":{"kind":"circle","radius":1,"colour":1}}', "colour", "unknown"),
    ('{"kind":"hexagon"}', "kind", "not one of"),
    ('{"radius":1}', "kind", "missing"),
    ('{"kind":"line"}', "direction", "missing"),
    ('{"command":"eval","tol":2}', "tol", "(0, 1)"),
    ('{"command":"evaluate"}', "command", "not one of"),
])
def test_errors_name_the_field(text, field, words):
    with pytest.raises(SpecError) as info:
        parse_spec(text)
    assert info.value.field == field
    assert f'"{field}"' in str(info.value)
    assert words in str(info.value)


def test_malformed_json():
    with pytest.raises(SpecError, match="malformed JSON"):
        parse_spec('{"kind": circle}')


def test_job_documents():
    job = parse_spec('{"command":"anomaly","input":"c.json","center":[1,0]}')
    assert isinstance(job, JobSpec) and job.center == [1, 0]
    assert parse_spec(serialize(job)) == job


def test_schema_is_valid_and_closed():
    import jsonschema

    s = schema()
    jsonschema.Draft202012Validator.check_schema(s)
    for name, d in s["$defs"].items():
        if name not in ("curve", "worldline"):
            assert d["additionalProperties"] is False, name


def test_serialize_plain_reports():
    text = serialize({"n": np.float64(1.5), "grid": np.int64(3), "ok": True})
    assert json.loads(text) == {"n": 1.5, "grid": 3, "ok": True}
