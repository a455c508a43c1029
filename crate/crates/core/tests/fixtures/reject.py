import json
import sys

for line in sys.stdin:
    print(json.dumps({"kind": "error", "message": "unsupported domain"}), flush=True)
