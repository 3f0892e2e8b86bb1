# Copyright 2026 the groundqa authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

PARKING = (
    "Parking permits are issued by the transport office. Residents may hold at most two permits per household. "
    "A permit costs forty dollars per year.\n\nVisitors may park for two hours without a permit."
)
LIBRARY = (
    "Library cards are free for every resident. Borrowed books must be returned within three weeks. "
    "Late returns incur a fine of ten cents per day."
)


def test_health(api):
    status, body = api.request("GET", "/api/health")
    assert status == 200
    api.validate(body, "health")
    assert body["status"] == "ok"
    assert body["index_size"] == 0


def test_pdf_upload_list_get_delete(api, fixtures):
    status, body = api.upload("three_page.pdf", (fixtures / "three_page.pdf").read_bytes())
    assert status == 200, body
    api.validate(body, "ingest_response")
    assert body["page_count"] == 3
    assert body["chunk_count"] > 0
    assert body["created"] is True
    doc_id = body["document_id"]

    status, again = api.upload("three_page.pdf", (fixtures / "three_page.pdf").read_bytes())
    assert status == 200
    assert again["document_id"] == doc_id
    assert again["created"] is False

    status, listing = api.request("GET", "/api/documents")
    assert status == 200
    api.validate(listing, "document_list")
    assert [d["document_id"] for d in listing["documents"]] == [doc_id]

    status, record = api.request("GET", f"/api/documents/{doc_id}")
    assert status == 200
    api.validate(record, "document_record")

    status, deleted = api.request("DELETE", f"/api/documents/{doc_id}")
    assert status == 200
    api.validate(deleted, "delete_response")
    status, err = api.request("DELETE", f"/api/documents/{doc_id}")
    assert status == 404
    api.validate(err, "error")
    assert err["error"]["code"] == "not_found"


def test_upload_errors(api, fixtures):
    status, err = api.upload("empty.txt", b"   \n", "text/plain")
    assert status == 422
    api.validate(err, "error")
    status, err = api.upload("truncated.pdf", (fixtures / "truncated.pdf").read_bytes())
    assert status == 400
    api.validate(err, "error")
    status, err = api.request("POST", "/api/documents", "{broken", {"Content-Type": "application/json"})
    assert status == 400
    assert err["error"]["code"] == "bad_request"


def test_conversation_flow(api):
    for name, text in (("parking.txt", PARKING), ("library.txt", LIBRARY)):
        status, body = api.request("POST", "/api/documents", {"name": name, "text": text})
        assert status == 200, body

    status, conv = api.request("POST", "/api/conversations")
    assert status == 200
    api.validate(conv, "conversation_created")
    cid = conv["conversation_id"]

    status, first = api.request("POST", f"/api/conversations/{cid}/query",
                                {"question": "How much does a parking permit cost per year?", "debug": True})
    assert status == 200, first
    api.validate(first, "answer")
    assert first["insufficient_context"] is False
    assert first["citations"]
    assert "trace" in first
    assert len(first["trace"]["rewordings"]) == 5
    assert first["citations"][0]["file_name"] == "parking.txt"

    status, second = api.request("POST", f"/api/conversations/{cid}/query", {"question": "And for visitors?"})
    assert status == 200
    api.validate(second, "answer")
    assert "trace" not in second
    assert second["turn_index"] == 1

    status, history = api.request("GET", f"/api/conversations/{cid}")
    assert status == 200
    api.validate(history, "conversation_history")
    turns = history["turns"]
    assert [t["turn_index"] for t in turns] == [0, 1]
    assert turns[0]["answer"] == first["answer"]
    assert turns[0]["citation_chunk_ids"] == [c["chunk_id"] for c in first["citations"]]


def test_query_errors(api):
    status, err = api.request("POST", "/api/conversations/" + "0" * 32 + "/query", {"question": "q?"})
    assert status == 404
    api.validate(err, "error")

    status, conv = api.request("POST", "/api/conversations")
    cid = conv["conversation_id"]
    status, err = api.request("POST", f"/api/conversations/{cid}/query", {"question": ""})
    assert status == 400
    api.validate(err, "error")

    status, refusal = api.request("POST", f"/api/conversations/{cid}/query", {"question": "Anything at all?"})
    assert status == 200
    api.validate(refusal, "answer")
    assert refusal["insufficient_context"] is True
    assert refusal["answer"] == "not enough context"
    assert refusal["citations"] == []

    status, err = api.request("GET", "/api/nothing-here")
    assert status == 404
    api.validate(err, "error")


def test_restart_keeps_documents(tmp_path):
    import re
    import subprocess

    from conftest import ENGINE

    data = tmp_path / "data"

    def start():
        proc = subprocess.Popen([ENGINE, "serve", "--port", "0", "--data-dir", str(data)],
                                stdout=subprocess.PIPE, text=True)
        base = re.search(r"listening on (http://\S+)", proc.stdout.readline()).group(1)
        return proc, base

    import json
    import urllib.request

    proc, base = start()
    req = urllib.request.Request(base + "/api/documents", data=json.dumps({"name": "p.txt", "text": PARKING}).encode(),
                                 headers={"Content-Type": "application/json"}, method="POST")
    doc_id = json.loads(urllib.request.urlopen(req, timeout=60).read())["document_id"]
    proc.kill()
    proc.wait()

    proc, base = start()
    try:
        listing = json.loads(urllib.request.urlopen(base + "/api/documents", timeout=60).read())
        assert [d["document_id"] for d in listing["documents"]] == [doc_id]
    finally:
        proc.terminate()
        proc.wait()
