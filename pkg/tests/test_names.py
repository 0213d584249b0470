import pytest
from hypothesis import given, strategies as st

from allowlistforge.errors import IoFailure, MalformedName
from allowlistforge.names import (
    AllowList,
    MergeStore,
    PackageName,
    ReadReport,
    is_valid_package_name,
    merge,
    parse_allowlist_text,
    parse_package_name,
    read_allowlist,
    serialize_allowlist,
    write_allowlist,
)

segment = st.text(alphabet="abcXYZ019_-", min_size=1, max_size=4)
names = st.lists(segment, min_size=1, max_size=4).map(lambda s: ".".join(s))


@pytest.mark.parametrize("text", ["com", "com.example", "a.b_c.d-e.F9", "  org.apache\t"])
def test_valid_names(text):
    assert str(parse_package_name(text)) == text.strip()


@pytest.mark.parametrize("text", ["", "   ", ".", "com.", ".com", "com..example", "com.ex ample", "com/example",
                                  "com.exämple", "com.$x"])
def test_malformed_names(text):
    with pytest.raises(MalformedName):
        parse_package_name(text)
    assert not is_valid_package_name(text)


def test_case_is_significant():
    assert parse_package_name("Com.Example") != parse_package_name("com.example")


def test_root_and_field_count():
    p = parse_package_name("com.google.android.gms")
    assert p.root() == "com"
    assert p.field_count() == 4


def test_covers_is_segment_aware():
    base = parse_package_name("com.example")
    assert base.covers(parse_package_name("com.example"))
    assert base.covers(parse_package_name("com.example.sub"))
    assert not base.covers(parse_package_name("com.examplefoo"))
    assert not base.covers(parse_package_name("com"))


def test_allowlist_is_sorted_and_deduplicated():
    al = AllowList.from_names(["org.b", "com.a", "org.b", "com.a.x"])
    assert al.names() == ["com.a", "com.a.x", "org.b"]
    assert len(al) == 3
    assert "org.b" in al and parse_package_name("com.a") in al and "org" not in al


def test_merge_union_and_store():
    a = [parse_package_name(x) for x in ("com.a", "org.b")]
    b = [parse_package_name(x) for x in ("org.b", "io.c")]
    merged = merge([a, b])
    assert merged.names() == ["com.a", "io.c", "org.b"]
    assert not merged.refined

    store = MergeStore()
    assert store.submit(["com.a", "org.b"]) == 2
    assert store.submit(["org.b", "io.c"]) == 1
    assert store.snapshot() == merged


def test_merge_store_concurrent_submitters():
    import threading

    store = MergeStore()
    chunks = [[f"g{i}.n{j}" for j in range(200)] for i in range(8)]
    threads = [threading.Thread(target=store.submit, args=(c + chunks[0],)) for c in chunks]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(store) == 8 * 200


def test_file_format(tmp_path):
    al = AllowList.from_names(["org.b", "com.a"])
    assert serialize_allowlist(al) == "com.a\norg.b\n"
    dest = tmp_path / "sub" / "list.txt"
    write_allowlist(al, dest)
    assert dest.read_bytes() == b"com.a\norg.b\n"
    assert read_allowlist(dest) == al
    assert not list(dest.parent.glob("*.tmp"))


def test_reader_accepts_crlf_blank_lines_and_reports_duplicates():
    report = ReadReport()
    al = parse_allowlist_text("com.a\r\n\r\norg.b\r\ncom.a\r\n", report)
    assert al.names() == ["com.a", "org.b"]
    assert report.duplicates == 1


def test_reader_reports_line_number():
    with pytest.raises(MalformedName) as info:
        parse_allowlist_text("com.a\norg..b\n")
    assert info.value.line == 2


def test_reader_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        read_allowlist(tmp_path / "absent.txt")


@given(st.lists(names, max_size=40))
def test_roundtrip_property(raw):
    al = AllowList.from_names(raw)
    assert parse_allowlist_text(serialize_allowlist(al)) == al


@given(st.lists(names, max_size=40))
def test_refined_flag_does_not_affect_equality(raw):
    assert AllowList.from_names(raw, refined=True) == AllowList.from_names(raw)


def test_package_name_rejects_bad_segments_directly():
    with pytest.raises(MalformedName):
        PackageName(())
    with pytest.raises(MalformedName):
        PackageName(("com", ""))
