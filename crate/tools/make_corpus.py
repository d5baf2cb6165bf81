#!/usr/bin/env python3
"""Regenerates crates/core/assets/corpus.txt.

The corpus is synthetic plain text in the style of HF traffic: operator
exchanges, coastal weather and navigation warnings, and general prose.
It is released to the public domain along with this script.
"""
import random
import sys

SEED = 20261017
TARGET_BYTES = 1_250_000

CALL_PREFIX = ["DL", "G", "F", "EA", "I", "OH", "SM", "LA", "PA", "ON", "OK", "SP",
               "HA", "YO", "LZ", "UA", "W", "K", "N", "VE", "JA", "VK", "ZL", "PY", "LU"]
NAMES = ["HANS", "PETER", "ANNA", "MARIA", "JOHN", "PAUL", "ERIK", "OLGA", "LUIS",
         "MARCO", "JAN", "PIET", "KARL", "ROSA", "TOM", "BILL", "SUE", "KEN", "YUKI", "IVAN"]
CITIES = ["HAMBURG", "MUNICH", "LONDON", "PARIS", "MADRID", "ROME", "OSLO", "HELSINKI",
          "PRAGUE", "WARSAW", "VIENNA", "BOSTON", "DENVER", "TOKYO", "SYDNEY", "LIMA", "LISBON"]
RIGS = ["HOMEBREW QRP RIG", "SDR TRANSCEIVER", "OLD TUBE RIG", "100 W TRANSCEIVER",
        "SMALL PORTABLE RIG", "KIT TRANSCEIVER"]
ANTS = ["DIPOLE", "END FED WIRE", "YAGI AT 15 M", "VERTICAL", "LOOP", "LONG WIRE", "G5RV"]
WX = ["SUNNY", "CLOUDY", "RAINY", "FOGGY", "WINDY", "SNOWING", "WARM", "COLD"]
AREAS = ["GERMAN BIGHT", "FISHER", "DOGGER", "HUMBER", "THAMES", "DOVER", "WIGHT",
         "PORTLAND", "PLYMOUTH", "BISCAY", "FITZROY", "SOLE", "LUNDY", "SHANNON",
         "ROCKALL", "MALIN", "HEBRIDES", "BAILEY", "FAIR ISLE", "VIKING", "UTSIRE"]
DIRS = ["NORTH", "NORTHEAST", "EAST", "SOUTHEAST", "SOUTH", "SOUTHWEST", "WEST", "NORTHWEST"]
SEAS = ["SMOOTH", "SLIGHT", "MODERATE", "ROUGH", "VERY ROUGH", "HIGH"]
VIS = ["GOOD", "MODERATE", "POOR", "VERY POOR"]

NOUNS = ["river", "signal", "harbour", "island", "letter", "engine", "village", "station",
         "winter", "garden", "mountain", "ship", "lamp", "window", "road", "forest",
         "market", "bridge", "storm", "valley", "clock", "compass", "antenna", "keeper",
         "fisherman", "teacher", "traveller", "doctor", "sailor", "farmer", "child",
         "morning", "evening", "message", "journey", "coast", "field", "house", "tower"]
ADJS = ["old", "quiet", "bright", "cold", "distant", "narrow", "heavy", "small",
        "green", "grey", "patient", "careful", "sudden", "long", "early", "late",
        "warm", "empty", "busy", "steady", "faint", "clear", "strange", "simple"]
VERBS = ["watched", "carried", "followed", "found", "heard", "crossed", "remembered",
         "opened", "answered", "repaired", "visited", "described", "measured",
         "waited for", "called", "reached", "noticed", "lost", "built", "sent"]
ADVS = ["slowly", "again", "carefully", "at last", "once more", "without a word",
        "before dawn", "after the rain", "in silence", "with some effort", "quickly"]
PREPS = ["near", "behind", "across", "beyond", "beside", "under", "above", "along"]


def callsign(r):
    return "%s%d%s" % (r.choice(CALL_PREFIX), r.randint(0, 9),
                       "".join(r.choice("ABCDEFGHIJKLMNOPQRSTUVWXYZ") for _ in range(r.randint(1, 3))))


def qso(r):
    a, b = callsign(r), callsign(r)
    rst = "%d%d9" % (r.randint(3, 5), r.randint(5, 9))
    lines = [
        "CQ CQ CQ DE %s %s %s PSE K" % (a, a, a),
        "%s DE %s GM DR OM TNX FER CALL" % (a, b),
        "UR RST %s %s = NAME %s %s = QTH %s %s" % (rst, rst, r.choice(NAMES), r.choice(NAMES),
                                                    r.choice(CITIES), r.choice(CITIES)),
        "RIG HERE IS %s ANT %s = WX %s TEMP %d C" % (r.choice(RIGS), r.choice(ANTS), r.choice(WX),
                                                     r.randint(-10, 35)),
        "HW CPY? %s DE %s KN" % (a, b),
        "R R FB TNX FER QSO %s 73 ES GL SK" % r.choice(NAMES),
    ]
    return "\n".join(lines[: r.randint(3, len(lines))]) + "\n"


def navtex(r):
    msg = ["ZCZC %s%d%02d" % (r.choice("ABCDEFGHIJKL"), r.randint(0, 9), r.randint(0, 99))]
    msg.append("%02d%02d UTC %d %s" % (r.randint(0, 23), r.choice([0, 30]), r.randint(1, 28),
                                       r.choice(["JAN", "FEB", "MAR", "APR", "MAY", "JUN",
                                                 "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"])))
    if r.random() < 0.6:
        msg.append("GALE WARNING" if r.random() < 0.4 else "SHIPPING FORECAST")
        for _ in range(r.randint(2, 5)):
            msg.append("%s: %s %d TO %d, OCCASIONALLY %d. SEA STATE %s. VISIBILITY %s." % (
                r.choice(AREAS), r.choice(DIRS), r.randint(3, 6), r.randint(6, 8), r.randint(8, 10),
                r.choice(SEAS), r.choice(VIS)))
    else:
        msg.append("NAV WARNING %d/%d" % (r.randint(1, 999), r.randint(20, 30)))
        msg.append("POSITION %02d-%02d.%dN %03d-%02d.%dW. %s" % (
            r.randint(40, 70), r.randint(0, 59), r.randint(0, 9), r.randint(0, 30), r.randint(0, 59),
            r.randint(0, 9), r.choice(["LIGHT BUOY UNLIT.", "DERELICT VESSEL ADRIFT.",
                                       "CABLE OPERATIONS IN PROGRESS, WIDE BERTH REQUESTED.",
                                       "FIRING EXERCISES, MARINERS ADVISED TO KEEP CLEAR.",
                                       "WRECK MARKED BY BUOY."])))
    msg.append("NNNN")
    return "\n".join(msg) + "\n"


def sentence(r):
    s = "the %s %s %s the %s %s %s the %s %s" % (
        r.choice(ADJS), r.choice(NOUNS), r.choice(VERBS), r.choice(ADJS), r.choice(NOUNS),
        r.choice(PREPS), r.choice(NOUNS), r.choice(ADVS))
    if r.random() < 0.3:
        s += ", and the %s %s %d times" % (r.choice(NOUNS), r.choice(VERBS), r.randint(2, 12))
    if r.random() < 0.15:
        s = "\"%s\"" % s
    s = s[0].upper() + s[1:]
    return s + r.choice([".", ".", ".", "!", "?"])


def prose(r):
    return " ".join(sentence(r) for _ in range(r.randint(3, 8))) + "\n"


def main():
    r = random.Random(SEED)
    out, size = [], 0
    while size < TARGET_BYTES:
        x = r.random()
        block = qso(r) if x < 0.35 else navtex(r) if x < 0.6 else prose(r)
        out.append(block + "\n")
        size += len(block) + 1
    path = sys.argv[1] if len(sys.argv) > 1 else "crates/core/assets/corpus.txt"
    with open(path, "w", encoding="ascii") as f:
        f.write("".join(out))


if __name__ == "__main__":
    main()
