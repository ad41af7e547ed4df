"""Published reference values shared by several test modules."""

# pure amplification at epsilon = 1 with tuple bound 1024, keyed by sampling rate
AMPLIFICATION_TABLE = {
    0.001: [0.7426, 0.2878, 0.0660, 0.0161, 0.0040, 0.0010],
    0.01: [0.9999, 0.9976, 0.6538, 0.1612, 0.0400, 0.0100],
    0.1: [1.0000, 1.0000, 1.0000, 0.9999, 0.4007, 0.1000],
}
AMPLIFICATION_TAUS = [1, 4, 16, 64, 256, 1024]

DEMO_EDGES = "A B\nA C\nB C\nB D\nC D\nC E\nD E\nD F\nE F\nE G\nF G\n"
DEMO_TRIANGLE_COUNTS = {"A": 1, "B": 2, "C": 3, "D": 3, "E": 3, "F": 2, "G": 1}
