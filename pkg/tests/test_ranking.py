import io

import pytest

from recaudit.centrality import Measure, ScoreVector
from recaudit.domain import StanceLabel, VeracityLabel
from recaudit.errors import IncompleteLabelsError, IntegrityError, ParameterError, ParseError
from recaudit.ranking import (
    class_distribution,
    merge_labels,
    rank_videos,
    read_labeled,
    read_labels,
    read_ranking,
    select_top_percent,
    selection_size,
    write_class_distribution,
    write_labeled,
    write_labels,
    write_ranking,
)


def composite(d):
    return ScoreVector(Measure.COMPOSITE, tuple(d), list(d.values()))


def test_rank_order_and_tie_break():
    rl = rank_videos(composite({"c": 2.0, "b": 3.0, "a": 2.0, "d": 0.5}))
    assert rl.video_ids == ["b", "a", "c", "d"]
    assert [e.rank for e in rl] == [1, 2, 3, 4]


@pytest.mark.parametrize("n,pct,k", [
    (0, 1, 0), (1, 1, 1), (200, 1, 2), (201, 1, 3), (10, 100, 10), (3, 50, 2), (1000, 0.1, 1),
])
def test_selection_size(n, pct, k):
    assert selection_size(n, pct) == k


@pytest.mark.parametrize("pct", [0, -1, 100.5])
def test_selection_rejects_pct(pct):
    with pytest.raises(ParameterError):
        selection_size(10, pct)


def test_select_does_not_expand_ties():
    rl = rank_videos(composite({f"v{i:03d}": 1.0 for i in range(150)}))
    sel = select_top_percent(rl, 1)
    assert sel.video_ids == ["v000", "v001"]


def test_ranking_csv_round_trip():
    rl = rank_videos(composite({"a": 0.1, "b": 1 / 3, "c": 5.0}))
    buf = io.StringIO()
    write_ranking(rl, buf)
    buf.seek(0)
    assert read_ranking(buf) == rl
    buf = io.StringIO()
    write_ranking(rl, buf, titles={"c": "Abortion, explained"})
    assert buf.getvalue().splitlines()[1] == '1,c,"Abortion, explained",5.0'


def test_read_labels_and_errors():
    labels, scheme = read_labels(io.StringIO("video_id,label\na,Pro\nb,anti\n\nc,neutral\n"))
    assert scheme == "stance"
    assert labels == {"a": StanceLabel.PRO, "b": StanceLabel.ANTI, "c": StanceLabel.NEUTRAL}
    _, scheme = read_labels(io.StringIO("video_id,label\na,misinformation\n"))
    assert scheme == "veracity"
    with pytest.raises(ParseError, match="line 1"):
        read_labels(io.StringIO("id,lab\n"))
    with pytest.raises(ParseError, match="line 3"):
        read_labels(io.StringIO("video_id,label\na,pro\nb,maybe\n"), scheme="stance")
    with pytest.raises(IntegrityError):
        read_labels(io.StringIO("video_id,label\na,pro\na,anti\n"))


def test_labels_write_read():
    labels = {"b": VeracityLabel.MISINFO, "a": VeracityLabel.DEBUNK}
    buf = io.StringIO()
    write_labels(labels, buf)
    buf.seek(0)
    assert read_labels(buf) == (labels, "veracity")


def test_merge_labels(caplog):
    rl = rank_videos(composite({"a": 3.0, "b": 2.0}))
    labels = {"a": StanceLabel.ANTI, "b": StanceLabel.PRO, "z": StanceLabel.PRO}
    lr = merge_labels(rl, labels)
    assert lr.scores == [1, -1]
    assert "not in the selection" in caplog.text
    with pytest.raises(IncompleteLabelsError) as exc:
        merge_labels(rl, {"a": StanceLabel.ANTI})
    assert exc.value.missing == ["b"]
    assert exc.value.exit_code == 6
    with pytest.raises(IntegrityError):
        merge_labels(rl, {"a": StanceLabel.ANTI, "b": VeracityLabel.DEBUNK})


def test_labeled_round_trip_and_distribution():
    rl = rank_videos(composite({"a": 3.0, "b": 2.0, "c": 1.0, "d": 0.0}))
    lr = merge_labels(rl, {"a": StanceLabel.PRO, "b": StanceLabel.PRO,
                           "c": StanceLabel.NEUTRAL, "d": StanceLabel.ANTI})
    buf = io.StringIO()
    write_labeled(lr, buf)
    buf.seek(0)
    assert read_labeled(buf) == lr
    cd = class_distribution(lr)
    assert cd.fractions == {StanceLabel.PRO: 0.5, StanceLabel.NEUTRAL: 0.25,
                            StanceLabel.ANTI: 0.25}
    out = io.StringIO()
    write_class_distribution({"p1": cd}, out)
    assert out.getvalue().splitlines()[1:] == [
        "p1,stance,pro,2,0.5", "p1,stance,neutral,1,0.25", "p1,stance,anti,1,0.25"]
