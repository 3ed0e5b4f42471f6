"""Reference transition matrices, rounded to four decimals.

Rows are listed from column 0; omitted trailing entries are zero.
"""

RECURRENT_HAT = [
    [.6000, .4000],
    [.2667, .3167, .4167],
    [.1026, .1603, .4657, .2715],
    [0, .0156, .2417, .4176, .3250],
    [0, 0, .0565, .2035, .4586, .2814],
    [0, 0, 0, .0250, .2336, .4289, .3125],
]

RECURRENT_CHECK = [
    [.6000, .2531, .1469],
    [.4215, .3167, .2419, .0199],
    [0, .2760, .4657, .2036, .0547],
    [0, 0, .3223, .4176, .2341, .0260],
    [0, 0, 0, .2826, .4586, .2110, .0478],
]

# a few of these were given with decimal commas; normalized here
TRANSIENT_HAT = [
    [.3333, .6666],
    [.1026, .3205, .5769],
    [.0302, .1163, .4712, .3824],
    [0, .0062, .1707, .4150, .4080],
    [0, 0, .0331, .1621, .4600, .3448],
    [0, 0, 0, .0156, .1905, .4279, .3660],
]

TRANSIENT_CHECK = [
    [.3333, .3198, .3469],
    [.2138, .3205, .4289, .0368],
    [0, .1565, .4711, .2726, .0998],
    [0, 0, .2395, .4150, .3061, .0394],
    [0, 0, 0, .2160, .4600, .2542, .0697],
    [0, 0, 0, 0, .2583, .4279, .2746, .0391],
]


def max_deviation(reference, computed):
    worst = 0.0
    for n, row in enumerate(reference):
        for m in range(len(computed[n])):
            want = row[m] if m < len(row) else 0.0
            worst = max(worst, abs(float(computed[n][m]) - want))
    return worst
