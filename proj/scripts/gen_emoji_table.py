#!/usr/bin/env python3
# Regenerates core/src/emoji_data.inc from the `emoji` package alias table.
import sys

import emoji


def esc(s):
    return "".join("\\x%02x" % b for b in s.encode())


def main(out_path):
    rows = []
    for seq, data in emoji.EMOJI_DATA.items():
        name = data["en"]
        if name.endswith(":"):
            name = name[:-1]
        rows.append((seq, name))
    rows.sort(key=lambda r: r[0].encode())
    with open(out_path, "w") as f:
        f.write("// Generated from the emoji shortcode alias table (emoji package, English names).\n")
        f.write("// Each entry: UTF-8 sequence, alias without the trailing colon.\n")
        for seq, name in rows:
            plain = all(ord(c) < 128 and c not in '"\\' for c in name)
            f.write('{"%s", "%s"},\n' % (esc(seq), name if plain else esc(name)))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "core/src/emoji_data.inc")
