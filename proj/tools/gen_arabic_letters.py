#!/usr/bin/env python3
"""Regenerates src/arabic_letters.inc: ranges of Arabic-script letters (gc=Lo)."""
import sys
import unicodedata

BLOCKS = [(0x0600, 0x06FF), (0x0750, 0x077F), (0x08A0, 0x08FF),
          (0xFB50, 0xFDFF), (0xFE70, 0xFEFF)]


def ranges():
    out = []
    for lo, hi in BLOCKS:
        start = None
        for cp in range(lo, hi + 2):
            is_letter = cp <= hi and unicodedata.category(chr(cp)) == "Lo"
            if is_letter and start is None:
                start = cp
            elif not is_letter and start is not None:
                out.append((start, cp - 1))
                start = None
    return out


def main():
    lines = [f"// Generated by tools/gen_arabic_letters.py (Unicode {unicodedata.unidata_version}).",
             "// Do not edit by hand."]
    for lo, hi in ranges():
        lines.append(f"{{0x{lo:04X}, 0x{hi:04X}}},")
    sys.stdout.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
