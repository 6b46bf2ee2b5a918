import pytest

from holdscan.corpus import (
    Corpus,
    attach_holds,
    ingest_holds,
    ingest_transcripts,
    validate_transcripts,
    write_holds,
    write_transcripts,
)
from holdscan.errors import (
    DuplicateTurnIndex,
    MalformedRow,
    MissingColumn,
    NonMonotonicTimestamps,
    UnknownCall,
)

HEADER = "call_id,turn_index,channel,start_ms,end_ms,text,label\n"


def write_csv(tmp_path, body, name="transcripts.csv", header=HEADER):
    path = tmp_path / name
    path.write_text(header + body, encoding="utf-8")
    return path


def test_two_calls_pass_through(tmp_path):
    path = write_csv(
        tmp_path,
        "a,0,agent,0,1000,hello,0\n"
        "a,1,client,1500,2500,hi,0\n"
        "b,0,agent,0,900,good morning,0\n"
        "b,1,client,1000,1800,hello,0\n",
    )
    corpus = ingest_transcripts(path)
    assert len(corpus.calls) == 2
    assert corpus.n_turns() == 4
    assert corpus.label_counts() == {0: 4, 1: 0, 2: 0}
    assert corpus.provenance == "ingested"


def test_end_before_start_is_malformed(tmp_path):
    path = write_csv(tmp_path, "a,0,agent,2000,1000,hello,0\n")
    with pytest.raises(MalformedRow) as err:
        ingest_transcripts(path)
    assert err.value.line_no == 2


def test_header_only_gives_empty_corpus(tmp_path):
    corpus = ingest_transcripts(write_csv(tmp_path, ""))
    assert isinstance(corpus, Corpus)
    assert len(corpus.calls) == 0


def test_missing_column(tmp_path):
    path = write_csv(tmp_path, "a,0,0,hello\n", header="call_id,turn_index,start_ms,text\n")
    with pytest.raises(MissingColumn) as err:
        ingest_transcripts(path)
    assert "end_ms" in err.value.columns


def test_duplicate_turn_index(tmp_path):
    path = write_csv(tmp_path, "a,0,agent,0,1000,x,0\na,0,agent,2000,3000,y,0\n")
    with pytest.raises(DuplicateTurnIndex):
        ingest_transcripts(path)


def test_non_monotonic_timestamps(tmp_path):
    path = write_csv(tmp_path, "a,0,agent,5000,6000,x,0\na,1,agent,1000,2000,y,0\n")
    with pytest.raises(NonMonotonicTimestamps):
        ingest_transcripts(path)


def test_rows_reordered_by_turn_index(tmp_path):
    path = write_csv(tmp_path, "a,1,agent,2000,3000,second,0\na,0,agent,0,1000,first,0\n")
    corpus = ingest_transcripts(path)
    assert [t.text for t in corpus.calls[0].turns] == ["first", "second"]


def test_optional_channel_and_label(tmp_path):
    path = write_csv(
        tmp_path,
        "a,0,0,1000,hello\n",
        header="call_id,turn_index,start_ms,end_ms,text\n",
    )
    corpus = ingest_transcripts(path)
    turn = corpus.calls[0].turns[0]
    assert turn.channel == "unknown"
    assert turn.label is None


def test_bad_label_is_malformed(tmp_path):
    path = write_csv(tmp_path, "a,0,agent,0,1000,x,7\n")
    with pytest.raises(MalformedRow):
        ingest_transcripts(path)


def test_comment_lines_skipped(tmp_path):
    path = write_csv(tmp_path, "# comment row\na,0,agent,0,1000,x,0\n")
    assert ingest_transcripts(path).n_turns() == 1


def test_roundtrip_transcripts(tmp_path):
    path = write_csv(
        tmp_path,
        "a,0,agent,0,1000,hello world,1\n"
        "a,2,client,1500,2500,ok then,0\n"
        "b,0,unknown,10,900,тест,2\n",
    )
    first = ingest_transcripts(path)
    out = tmp_path / "again.csv"
    write_transcripts(first, out, header_comment="roundtrip check")
    second = ingest_transcripts(out)
    assert first == second


def test_roundtrip_holds(tmp_path):
    tpath = write_csv(tmp_path, "a,0,agent,0,1000,x,0\nb,0,agent,0,1000,y,0\n")
    hpath = tmp_path / "holds.csv"
    hpath.write_text("call_id,hold_start_ms,hold_end_ms\na,5000,20000\na,30000,40000\n")
    corpus = attach_holds(ingest_transcripts(tpath), ingest_holds(hpath))
    assert len(corpus.call("a").holds) == 2
    out = tmp_path / "holds2.csv"
    write_holds(corpus, out)
    again = attach_holds(ingest_transcripts(tpath), ingest_holds(out))
    assert corpus == again


def test_holds_overlap_rejected(tmp_path):
    hpath = tmp_path / "holds.csv"
    hpath.write_text("call_id,hold_start_ms,hold_end_ms\na,5000,20000\na,10000,40000\n")
    with pytest.raises(MalformedRow):
        ingest_holds(hpath)


def test_attach_holds_unknown_call(tmp_path):
    tpath = write_csv(tmp_path, "a,0,agent,0,1000,x,0\n")
    with pytest.raises(UnknownCall):
        attach_holds(ingest_transcripts(tpath), {"zz": ()})


def test_validate_collects_multiple_diagnostics(tmp_path):
    path = write_csv(
        tmp_path,
        "a,0,agent,0,1000,ok,0\n"
        "a,1,agent,2000,1500,bad interval,0\n"
        "a,2,agent,3000,4000,ok,9\n",
    )
    diagnostics = validate_transcripts(path)
    assert [d.line_no for d in diagnostics] == [3, 4]


def test_validate_clean_file(tmp_path):
    path = write_csv(tmp_path, "a,0,agent,0,1000,ok,0\n")
    assert validate_transcripts(path) == []
