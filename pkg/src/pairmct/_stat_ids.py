"""Integer ids shared by both kernel backends."""

PAIRED_T = 0
WSR = 1
MUNZEL_F = 2
MUNZEL_BF = 3
WELCH = 4
WMW = 5
BM = 6
TML = 7

SIGN_FLIP = 0
POOLED_SHUFFLE = 1
COMBINED = 2

SCHEME_OF = {
    PAIRED_T: SIGN_FLIP,
    WSR: SIGN_FLIP,
    MUNZEL_F: SIGN_FLIP,
    MUNZEL_BF: SIGN_FLIP,
    WELCH: POOLED_SHUFFLE,
    WMW: POOLED_SHUFFLE,
    BM: POOLED_SHUFFLE,
    TML: COMBINED,
}

# Relative tolerance when comparing a resampled statistic with the observed one,
# so that values equal up to summation order count as ties.
TIE_RTOL = 1e-10
