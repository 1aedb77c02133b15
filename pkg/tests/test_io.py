import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tgcntrack import io
from tgcntrack.core import BoundingBox, Detection, DimensionMismatch, IngestError, ParseError


def test_parse_detection_row():
    dets = io.parse_detections("1,-1,10,20,5,8,0.9,-1,-1,-1\n")
    (d,) = dets[1]
    assert d.bbox == BoundingBox(10, 20, 5, 8)
    assert d.confidence == 0.9 and d.feature is None


def test_parse_detections_empty_and_order():
    assert io.parse_detections("") == {}
    dets = io.parse_detections("2,-1,5,5,1,1,1\n1,-1,0,0,1,1,1\n2,-1,0,0,2,2,1\n")
    assert list(dets) == [1, 2]
    assert [d.bbox.x for d in dets[2]] == [5, 0]


def test_zero_width_names_line():
    with pytest.raises(ParseError, match="line 2"):
        io.parse_detections("1,-1,0,0,1,1,1\n1,-1,10,20,0,8,0.9,-1,-1,-1\n")


@pytest.mark.parametrize("row", ["1,-1,0,0,1", "0,-1,0,0,1,1,1", "1,-1,a,0,1,1,1", "1,-1,0,0,1,1,1.5", "1,-1,0,nan,1,1,1"])
def test_malformed_detection_rows(row):
    with pytest.raises(ParseError, match="line 1"):
        io.parse_detections(row + "\n")


def test_comma_decimal_rejected():
    with pytest.raises(ParseError):
        io.parse_detections('1,-1,"0,5",0,1,1,1\n')


def test_parse_embeddings():
    emb = io.parse_embeddings("3,0,1.0,0.0\n", 2)
    np.testing.assert_array_equal(emb[(3, 0)], [1.0, 0.0])
    with pytest.raises(ParseError):
        io.parse_embeddings("3,0,1.0\n", 2)
    with pytest.raises(ParseError, match=r"line 3.*line 1"):
        io.parse_embeddings("3,0,1,0\n3,1,0,1\n3,0,1,1\n", 2)


def test_write_results():
    assert io.write_results([(1, 4, BoundingBox(10, 20, 5, 8))]) == "1,4,10,20,5,8,1,-1,-1,-1\n"
    rows = [(2, 1, BoundingBox(0, 0, 1, 1)), (1, 9, BoundingBox(0.1, 0, 1, 1)), (1, 3, BoundingBox(0, 0, 2, 2))]
    assert [ln.split(",")[:2] for ln in io.write_results(rows).splitlines()] == [["1", "3"], ["1", "9"], ["2", "1"]]


def test_results_parse_as_detections():
    rows = [(1, 4, BoundingBox(0.1, 1 / 3, 5.5, 8e-3)), (2, 4, BoundingBox(-7.25, 2, 1e10, 3))]
    dets = io.parse_detections(io.write_results(rows))
    assert [d.bbox for f in dets for d in dets[f]] == [r[2] for r in rows]


@pytest.mark.parametrize("row, considered", [
    ("1,1,0,0,5,5,0,1,1", False),
    ("1,1,0,0,5,5,1,7,1", False),
    ("1,1,0,0,5,5,1,1,1", True),
    ("1,1,0,0,5,5", True),
])
def test_ground_truth_considered(row, considered):
    (_, _, flag), = io.parse_ground_truth(row + "\n")[1]
    assert flag is considered


def test_ground_truth_error_names_line():
    text = "".join(f"{f},1,0,0,5,5,1,1,1\n" for f in range(1, 7)) + "7,1,0,0,-5,5,1,1,1\n"
    with pytest.raises(ParseError, match="line 7"):
        io.parse_ground_truth(text)


def test_attach_embeddings_missing_keys():
    dets = io.parse_detections("1,-1,0,0,1,1,1\n1,-1,5,5,1,1,1\n2,-1,0,0,1,1,1\n")
    with pytest.raises(IngestError) as exc:
        io.attach_embeddings(dets, {(1, 0): np.ones(2)})
    assert exc.value.missing == [(1, 1), (2, 0)]
    assert "(1,1), (2,0)" in str(exc.value)


def test_attach_filters_after_join():
    dets = io.parse_detections("1,-1,0,0,1,1,0.2\n1,-1,5,5,1,1,0.9\n")
    out = io.attach_embeddings(dets, {(1, 0): np.array([1.0, 0]), (1, 1): np.array([0, 1.0])}, 0.5)
    (d,) = out[1]
    np.testing.assert_array_equal(d.feature, [0, 1])


def test_attach_mixed_dims():
    dets = io.parse_detections("1,-1,0,0,1,1,1\n1,-1,5,5,1,1,1\n")
    with pytest.raises(DimensionMismatch):
        io.attach_embeddings(dets, {(1, 0): np.ones(2), (1, 1): np.ones(3)})


def test_config_round_trip_and_errors():
    tc, tr, layers = io.build_configs(io.parse_config("lambda1 = 0.4  # motion\n\nepochs=10\nlayers = 3\n"))
    assert (tc.lambda1, tr.epochs, layers) == (0.4, 10, 3)
    again = io.build_configs(io.parse_config(io.dump_config(tc, tr, layers)))
    assert again == (tc, tr, layers)
    for bad in ("bogus = 1\n", "lambda1 = 0.1\nlambda1 = 0.2\n", "lambda1\n", "epochs = 1.5\n"):
        with pytest.raises(ParseError):
            io.parse_config(bad)


def test_config_covers_every_field():
    text = io.dump_config(*io.build_configs({}))
    assert set(io.parse_config(text)) == io.CONFIG_KEYS


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
positive = st.floats(1e-6, 1e6, allow_nan=False)
boxes = st.builds(BoundingBox, finite, finite, positive, positive)


@given(st.lists(st.tuples(st.integers(1, 50), st.integers(1, 100), boxes), max_size=20))
def test_results_round_trip(rows):
    parsed = io.parse_results(io.write_results(rows))
    flat = sorted((f, tid, b.as_tuple()) for f, items in parsed.items() for tid, b in items)
    assert flat == sorted((f, tid, b.as_tuple()) for f, tid, b in rows)


@given(st.dictionaries(st.integers(1, 20), st.lists(st.tuples(boxes, st.floats(0, 1)), min_size=1, max_size=4)))
def test_detections_round_trip(spec):
    dets = {f: [Detection(f, b, c) for b, c in v] for f, v in spec.items()}
    parsed = io.parse_detections(io.write_detections(dets))
    assert {f: [(d.bbox, d.confidence) for d in ds] for f, ds in parsed.items()} == \
           {f: [(d.bbox, d.confidence) for d in ds] for f, ds in sorted(dets.items())}


@given(st.dictionaries(st.integers(1, 20), st.lists(st.tuples(st.integers(1, 9), boxes, st.booleans()),
                                                     min_size=1, max_size=4)))
def test_ground_truth_round_trip(gt):
    parsed = io.parse_ground_truth(io.write_ground_truth(gt))
    assert parsed == {f: sorted(v, key=lambda r: r[0]) for f, v in sorted(gt.items())}


@given(st.integers(1, 6), st.dictionaries(st.tuples(st.integers(1, 30), st.integers(0, 5)),
                                          st.lists(finite, min_size=6, max_size=6), min_size=1))
def test_embeddings_round_trip(d, raw):
    emb = {k: np.array(v[:d]) for k, v in raw.items()}
    parsed = io.parse_embeddings(io.write_embeddings(emb), d)
    assert parsed.keys() == emb.keys()
    assert all(np.array_equal(parsed[k], emb[k]) for k in emb)
