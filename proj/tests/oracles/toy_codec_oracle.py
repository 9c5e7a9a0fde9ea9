# Copyright 2026 The ConceptLM Authors.
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

"""Reference implementation of the hashed character n-gram toy codec.

Used once to freeze expected vectors into tests/unit/test_codec.cpp.
"""
import math
import struct
import sys

MASK = (1 << 64) - 1
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
BUCKET_SEED = 0x9E3779B97F4A7C15
SIGN_SEED = 0xD1B54A32D192ED03


def fnv1a(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK
    return h


def mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def encode(text: str, lang: str, d: int = 64):
    cps = list(lang + "|" + text)
    acc = [0.0] * d
    for n in (1, 2, 3):
        for i in range(len(cps) - n + 1):
            gram = "".join(cps[i:i + n]).encode("utf-8")
            h = fnv1a(bytes([n]) + gram)
            bucket = mix(h ^ BUCKET_SEED) % d
            sign = -1.0 if (mix(h ^ SIGN_SEED) & 1) else 1.0
            acc[bucket] += sign
    norm = math.sqrt(sum(a * a for a in acc))
    # round to float32 like the implementation's storage type
    return [struct.unpack("f", struct.pack("f", a / norm))[0] for a in acc]


if __name__ == "__main__":
    text = sys.argv[1] if len(sys.argv) > 1 else "abc"
    lang = sys.argv[2] if len(sys.argv) > 2 else "eng_Latn"
    d = int(sys.argv[3]) if len(sys.argv) > 3 else 64
    v = encode(text, lang, d)
    print(",\n".join(", ".join(repr(x) + "f" for x in v[i:i + 8]) for i in range(0, d, 8)))
