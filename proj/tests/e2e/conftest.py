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

import json
import os
import re
import signal
import subprocess
import urllib.error
import urllib.request
import uuid
from pathlib import Path

import jsonschema
import pytest

ENGINE = os.environ.get("GROUNDQA_ENGINE", "engine")
SCHEMA = Path(os.environ["GROUNDQA_SCHEMA"])
FIXTURES = Path(os.environ["GROUNDQA_FIXTURES"])


class Api:
    def __init__(self, base, schema):
        self.base = base
        self.schema = schema

    def validate(self, body, definition):
        ref = {"$ref": f"#/$defs/{definition}", "$defs": self.schema["$defs"]}
        jsonschema.validate(body, ref, cls=jsonschema.Draft202012Validator)

    def request(self, method, path, body=None, headers=None):
        data = None
        headers = dict(headers or {})
        if isinstance(body, (dict, list)):
            data = json.dumps(body).encode()
            headers.setdefault("Content-Type", "application/json")
        elif isinstance(body, (bytes, str)):
            data = body.encode() if isinstance(body, str) else body
        req = urllib.request.Request(self.base + path, data=data, method=method, headers=headers)
        try:
            with urllib.request.urlopen(req, timeout=60) as resp:
                return resp.status, json.loads(resp.read() or b"null")
        except urllib.error.HTTPError as err:
            return err.code, json.loads(err.read() or b"null")

    def upload(self, name, content, content_type="application/pdf"):
        boundary = uuid.uuid4().hex
        payload = (
            f"--{boundary}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"{name}\"\r\n"
            f"Content-Type: {content_type}\r\n\r\n"
        ).encode() + content + f"\r\n--{boundary}--\r\n".encode()
        return self.request("POST", "/api/documents", payload,
                            {"Content-Type": f"multipart/form-data; boundary={boundary}"})


@pytest.fixture()
def api(tmp_path):
    proc = subprocess.Popen(
        [ENGINE, "serve", "--port", "0", "--data-dir", str(tmp_path / "data")],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
        env={k: v for k, v in os.environ.items() if k not in ("ENGINE_CONFIG", "ENGINE_PORT", "ENGINE_DATA_DIR")},
    )
    line = proc.stdout.readline()
    match = re.search(r"listening on (http://\S+)", line)
    if not match:
        proc.kill()
        pytest.fail(f"engine did not start: {line!r} {proc.stderr.read()}")
    yield Api(match.group(1), json.loads(SCHEMA.read_text()))
    proc.send_signal(signal.SIGTERM)
    try:
        assert proc.wait(timeout=20) == 0
    finally:
        if proc.poll() is None:
            proc.kill()


@pytest.fixture()
def fixtures():
    return FIXTURES
