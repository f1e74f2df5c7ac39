import pytest

from recaudit.domain import (
    RecEvent,
    SessionLog,
    StanceLabel,
    VeracityLabel,
    VideoMeta,
    infer_scheme,
    label_to_score,
    parse_label,
    scheme_of,
)
from recaudit.errors import IntegrityError, ParameterError, ParseError


def test_label_scores():
    assert [label_to_score(l) for l in StanceLabel] == [-1, 0, 1]
    assert [label_to_score(l) for l in VeracityLabel] == [-1, 0, 1]


def test_neutral_labels_are_distinct_across_schemes():
    assert StanceLabel.NEUTRAL != VeracityLabel.NEUTRAL
    assert scheme_of(StanceLabel.NEUTRAL) == "stance"
    assert scheme_of(VeracityLabel.NEUTRAL) == "veracity"


@pytest.mark.parametrize("text,scheme,expected", [
    ("Pro", "stance", StanceLabel.PRO),
    (" anti-abortion ", "stance", StanceLabel.ANTI),
    ("misinformation", "veracity", VeracityLabel.MISINFO),
    ("Deceptive", "veracity", VeracityLabel.MISINFO),
    ("debunks", "veracity", VeracityLabel.DEBUNK),
])
def test_parse_label(text, scheme, expected):
    assert parse_label(text, scheme) is expected


def test_parse_label_rejects_cross_scheme():
    with pytest.raises(ParseError):
        parse_label("misinfo", "stance")
    with pytest.raises(ParameterError):
        parse_label("pro", "politics")


def test_infer_scheme():
    assert infer_scheme(["pro", "neutral"]) == "stance"
    assert infer_scheme(["debunk", "misinfo"]) == "veracity"
    assert infer_scheme(["neutral"]) == "stance"
    with pytest.raises(ParseError):
        infer_scheme(["pro", "misinfo"])


def test_rec_event_validation():
    with pytest.raises(IntegrityError):
        RecEvent("p", 0, "a", ("b", "b"))
    with pytest.raises(IntegrityError):
        RecEvent("p", 0, "a", ("a",))
    with pytest.raises(IntegrityError):
        RecEvent("p", -1, "a", ())
    ev = RecEvent("p", 3, "a", ["b", "c"], is_seed=True)
    rec = ev.to_record()
    assert rec["recommendations"] == [{"video_id": "b", "rank": 0}, {"video_id": "c", "rank": 1}]
    assert "watch_s" not in rec


def test_session_log_rules():
    a, b = RecEvent("p", 0, "a", ("b",)), RecEvent("p", 1, "b", ("a",))
    slog = SessionLog("p", [a, b], {"a": VideoMeta("a", "x")})
    assert slog.video_ids() == {"a", "b"}
    assert slog.missing_metadata == {"b"}
    with pytest.raises(IntegrityError, match="watched twice"):
        SessionLog("p", [a, RecEvent("p", 1, "a", ())])
    with pytest.raises(IntegrityError, match="does not increase"):
        SessionLog("p", [b, RecEvent("p", 1, "a", ())])
    with pytest.raises(TypeError):
        slog.metadata["c"] = VideoMeta("c")


def test_video_meta_round_trip():
    m = VideoMeta("v1", "Abortion talk", 120, 5, "ch")
    assert VideoMeta.from_record(m.to_record()) == m
    with pytest.raises(ParameterError):
        VideoMeta("v", duration_s=-1)
