from __future__ import annotations

import pytest

from razorcd.bundles import (
    canonical_json,
    content_hash,
    dump_bundle,
    hash_bundle_bytes,
    parse_bundle,
    parse_bundle_cached,
)
from razorcd.errors import MalformedBundle

DOC = {
    "apiVersion": "v1",
    "kind": "ConfigMap",
    "metadata": {"name": "a", "namespace": "ns"},
    "spec": {"x": 1, "y": [1, 2]},
}


def test_parse_roundtrip():
    data = dump_bundle([DOC, {**DOC, "metadata": {"name": "b", "namespace": "ns"}}])
    docs = parse_bundle(data)
    assert [d["metadata"]["name"] for d in docs] == ["a", "b"]


def test_hash_ignores_whitespace_and_key_order():
    noisy = b"""
kind: ConfigMap
apiVersion: v1

metadata:
    namespace:   ns
    name: a
spec:
  y:
    - 1
    - 2
  x: 1
"""
    assert hash_bundle_bytes(noisy) == content_hash([DOC])


def test_hash_changes_with_content():
    other = {**DOC, "spec": {"x": 2, "y": [1, 2]}}
    assert content_hash([DOC]) != content_hash([other])


@pytest.mark.parametrize(
    "payload",
    [
        b"",
        b"- just\n- a list\n",
        b"apiVersion: v1\nkind: ConfigMap\n",  # no metadata.name
        b"kind: ConfigMap\nmetadata: {name: a}\n",  # no apiVersion
        b"{unbalanced",
        "café: {".encode("utf-16"),
    ],
)
def test_malformed_bundles_rejected(payload):
    with pytest.raises(MalformedBundle):
        parse_bundle(payload)


def test_canonical_json_sorted_and_compact():
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


def test_cached_parse_same_content():
    data = dump_bundle([DOC])
    assert parse_bundle_cached(data) == parse_bundle(data)
    # Second hit serves the cache and must be equal too.
    assert parse_bundle_cached(data) == parse_bundle(data)
