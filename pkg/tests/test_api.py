"""
HTTP wrapper.

Claims:
  - library errors map to 400, precondition failures to 422
  - syntax errors report their byte offset
  - uploads go through the same payload validation as files
"""

import json

import pytest
from fastapi.testclient import TestClient

from api import app


@pytest.fixture
def client():
    return TestClient(app)


def _upload(data, name="payload.json"):
    return {"file": (name, json.dumps(data).encode(), "application/json")}


def test_health(client):
    assert client.get("/health").json() == {"status": "healthy"}
    assert client.get("/").json()["status"] == "running"


def test_degree(client):
    response = client.post("/degree", json={"expr": "((1,2),(3,4))"})
    assert response.status_code == 200
    assert response.json() == {"degree": 4}


def test_syntax_error(client):
    response = client.post("/degree", json={"expr": "(1,2"})
    assert response.status_code == 400
    assert response.json()["offset"] == 4
    assert response.json()["type"] == "BracketSyntaxError"


def test_normalize_rooted(client):
    response = client.post("/normalize", json={"expr": "((1,2),(3,4))", "rooted": True})
    assert response.json() == {"trees": ["(1,(2,(3,4)))", "(2,(1,(3,4)))"]}


def test_ihx_needs_edge(client):
    assert client.post("/ihx", json={"expr": "p((1,2),(3,4))"}).status_code == 400


def test_convert(client):
    response = client.post("/convert/grope-to-tower", files=_upload({"bodies": {"i": ["(j,k)"]}}))
    assert response.status_code == 200
    assert [t["tree"] for t in response.json()["trees"]] == ["p(i,(j,k))"]


def test_upload_must_be_json(client):
    response = client.post("/convert/grope-to-tower", files=_upload({"bodies": {}}, name="grope.txt"))
    assert response.status_code == 400
    assert "JSON" in response.json()["error"]


def test_k_slice_precondition(client):
    grope = {"bodies": {"1": ["(2,(2,2))"], "2": ["(1,(1,1))"]}}
    response = client.post("/certify/k-slice", files=_upload(grope), data={"k": "2"})
    assert response.status_code == 422
    assert "class 3 < 2k" in response.json()["error"]


def test_certify_and_verify(client):
    grope = {"bodies": {"1": ["(2,2)"], "2": ["(1,1)"]}}
    cert = client.post("/certify/height", files=_upload(grope)).json()
    assert cert["order"] == 1
    result = client.post("/verify", files=_upload(cert)).json()
    assert result["ok"]


def test_unknown_certificate_kind(client):
    grope = {"bodies": {"1": ["(2,2)"], "2": ["(1,1)"]}}
    assert client.post("/certify/sliceness", files=_upload(grope)).status_code == 404


def test_enumerate(client):
    response = client.get("/enumerate", params={"leaves": "1,2,3"})
    assert response.json()["count"] == 3
    response = client.get("/enumerate", params={"leaves": "1,2,3,4", "unrooted": "true"})
    assert response.json()["count"] == 3


def test_empty_grope_is_a_bad_request(client):
    response = client.post("/certify/height", files=_upload({"bodies": {}}))
    assert response.status_code == 400
    assert response.json()["type"] == "ValidationError"
