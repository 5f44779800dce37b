// Generated once: Python `random.Random(0x0B1EF00D)`, isotropic Gaussian with
// sigma = 31/5 rounded to integers, points outside the radius-15 disk rejected,
// coincident pairs rejected. Entries are (x1, y1, x2, y2) offsets from the keypoint.

pub(super) const BRIEF_PAIRS: [[i8; 4]; 256] = [
    [4, -10, -7, -8],
    [2, 7, 8, 1],
    [9, 4, -6, -6],
    [2, 1, 4, -8],
    [2, 2, -9, -4],
    [1, 5, -6, -3],
    [-3, 9, -2, 2],
    [2, 9, -9, 8],
    [4, -2, 4, -5],
    [-1, 6, 3, 3],
    [0, 1, -5, 1],
    [-3, -5, 2, -7],
    [4, 3, 3, 3],
    [1, 0, 6, -4],
    [1, 4, -1, 9],
    [9, 5, 10, 1],
    [-12, 5, 3, 5],
    [7, -8, 4, 3],
    [6, 0, -3, 3],
    [-2, 4, 0, 5],
    [3, 0, 7, 6],
    [1, 11, 9, 8],
    [-2, 5, -1, -6],
    [2, 14, -6, -3],
    [-3, -7, 7, -8],
    [4, -6, -12, 2],
    [-4, 1, 3, 5],
    [-13, -1, 6, 5],
    [0, -8, -4, -3],
    [-10, 7, 2, -2],
    [1, -4, 11, 0],
    [7, 4, 0, 2],
    [7, -8, -1, 6],
    [-1, 7, -2, 3],
    [11, -2, 3, 2],
    [-3, 2, -10, -3],
    [-1, -4, -11, 8],
    [3, -4, -9, 1],
    [5, 1, 8, -1],
    [-6, 0, -2, 4],
    [3, 7, -4, 2],
    [3, -9, 6, 5],
    [8, -10, -2, 5],
    [5, -6, -6, -4],
    [-6, 5, 2, -8],
    [1, 6, -3, -2],
    [8, 0, 10, -3],
    [5, 1, 0, -1],
    [2, 6, 6, 7],
    [-7, -3, 1, 5],
    [-3, -4, 1, -1],
    [4, -13, -7, 5],
    [8, 0, -3, -1],
    [-2, 9, 1, 4],
    [-7, 6, -2, 4],
    [-3, 6, 0, 5],
    [6, -5, 2, -9],
    [-3, -4, 0, -1],
    [0, -5, -12, 2],
    [-8, 5, 3, -3],
    [-7, 2, 2, 5],
    [6, 5, 1, -2],
    [-2, -14, -4, 2],
    [0, -4, -9, -1],
    [-2, -14, -7, 6],
    [2, 1, 5, 4],
    [-5, 0, -2, 3],
    [-12, 2, -3, -5],
    [4, 11, -7, 5],
    [2, -14, -9, -11],
    [0, -2, -8, -11],
    [8, 5, 5, 1],
    [-6, -9, 6, 7],
    [2, 6, -9, 1],
    [9, 9, 8, 7],
    [-2, 9, 10, 1],
    [1, 2, -8, -9],
    [-1, 3, 2, 5],
    [-7, -3, 1, -7],
    [-1, -2, 5, -3],
    [0, -3, -2, -2],
    [-9, 9, 7, 2],
    [4, 3, 7, 2],
    [-2, 8, -4, 0],
    [14, 3, 0, 6],
    [1, 2, 2, 7],
    [3, -3, 0, 0],
    [-1, 2, -6, 6],
    [0, -11, 10, 5],
    [-2, -2, -2, 4],
    [-9, 3, -1, -8],
    [8, 3, 2, -13],
    [8, 3, -3, -5],
    [2, 3, 1, -11],
    [2, -3, 5, -6],
    [0, 10, -1, -8],
    [-14, -1, 9, 6],
    [6, 0, 10, 1],
    [9, -3, -8, 1],
    [3, 4, 0, 2],
    [-2, 3, 1, 12],
    [-3, -8, -9, -1],
    [0, 0, 2, 4],
    [8, -6, 6, 5],
    [9, -1, 8, -3],
    [2, -2, 1, 1],
    [-10, -6, 5, 3],
    [-4, -5, -8, 1],
    [3, -2, 8, -6],
    [2, 9, -1, 2],
    [1, -2, -6, 8],
    [-2, -13, 1, -6],
    [12, 7, 12, 5],
    [-6, 9, -1, 12],
    [-8, -1, 0, 0],
    [-6, -8, 10, -9],
    [8, 0, 2, 9],
    [4, -9, 7, -9],
    [5, 4, 2, 5],
    [1, 1, -2, 4],
    [1, 1, 13, 3],
    [10, 7, 4, -1],
    [-4, 1, -1, 10],
    [0, 3, 7, 8],
    [-3, 14, 4, 3],
    [5, 5, -10, -7],
    [-4, 5, -8, 0],
    [-7, -1, -4, -3],
    [-6, 13, 3, -3],
    [1, 6, 8, -2],
    [-3, -4, 2, -3],
    [-2, 0, 1, -7],
    [-3, 6, 6, 6],
    [2, -4, -8, -1],
    [-1, -1, 0, 12],
    [-4, 2, 7, -4],
    [-5, 0, 5, 0],
    [-5, -8, 2, -3],
    [-6, 7, 1, 3],
    [9, 2, -2, -1],
    [-2, -11, -8, -6],
    [0, 5, 8, 5],
    [0, 1, -3, -7],
    [-6, 3, -7, 12],
    [2, 3, 1, 0],
    [7, 0, 1, -7],
    [-11, 4, 0, 7],
    [2, -6, -2, 0],
    [-5, -5, -1, -3],
    [-9, 3, 0, 14],
    [2, -13, 10, 6],
    [2, -11, 4, 3],
    [-1, -7, -13, -2],
    [-11, 4, -4, 0],
    [-7, 12, 1, 1],
    [2, 7, -5, 4],
    [4, 6, -7, -3],
    [-1, 12, 5, 11],
    [13, 1, 10, -5],
    [12, -9, -3, 6],
    [4, -7, 4, 2],
    [3, 3, 2, 1],
    [12, 7, 4, 2],
    [1, 2, -10, 2],
    [-11, -1, 0, 11],
    [-6, 7, -3, 6],
    [-3, -4, -2, 1],
    [-2, 2, -1, 1],
    [-4, -2, 1, 3],
    [5, -4, -9, 1],
    [-3, -5, -2, -3],
    [-10, 3, 2, -2],
    [-12, 3, 0, -14],
    [-9, -6, 8, 7],
    [3, 2, 11, -2],
    [3, -1, -1, -7],
    [-10, 1, 6, -5],
    [-11, 1, -6, 2],
    [7, -2, -3, -3],
    [-7, 1, 2, -9],
    [-3, -1, -10, -3],
    [11, -2, 1, 3],
    [-7, -3, 0, 6],
    [0, 2, 0, 1],
    [6, -2, -5, 6],
    [-3, 4, -13, 6],
    [-7, -9, -6, 6],
    [0, -3, -14, -2],
    [0, 9, 12, -3],
    [2, 3, -3, 3],
    [2, 9, -10, -9],
    [5, 0, -10, -4],
    [6, 0, -5, 0],
    [3, -3, -7, -5],
    [2, 1, 2, -4],
    [-5, 9, 2, -1],
    [-10, 9, 1, 6],
    [6, 10, 7, 9],
    [3, -2, 1, 6],
    [6, 4, 0, 3],
    [0, 8, -3, -4],
    [9, 2, 1, 7],
    [-3, -1, 8, 0],
    [-5, 0, 6, 11],
    [2, 9, 1, -7],
    [-5, 1, -11, 2],
    [-7, -4, -3, -6],
    [3, -4, -4, 4],
    [-2, -9, 1, 4],
    [-2, 2, -1, 0],
    [7, 4, 3, -6],
    [2, 4, 4, 1],
    [6, -7, 6, 6],
    [-1, 10, -7, -13],
    [-6, -10, 1, -2],
    [8, -1, 0, -4],
    [-6, -2, -6, 4],
    [-6, -1, 13, 0],
    [0, 3, 4, 2],
    [9, 9, 4, 6],
    [-11, 6, -8, 0],
    [4, -4, 1, -5],
    [10, 7, 9, 0],
    [-2, 4, -2, 1],
    [-11, -9, -14, -4],
    [-1, 1, 8, -9],
    [-10, 0, -6, -8],
    [5, -2, 8, -8],
    [-4, -10, 4, -4],
    [-2, 6, -2, -5],
    [3, -1, -3, 3],
    [-5, -2, 4, -1],
    [-1, -10, -8, 9],
    [-5, 4, 9, 7],
    [-6, -2, -4, 0],
    [3, -8, -1, -10],
    [-8, -1, -1, 11],
    [1, 1, -5, -10],
    [-6, 5, 5, 4],
    [-4, -9, 7, 1],
    [4, 10, 0, 4],
    [10, 10, -1, -4],
    [7, -4, -9, 4],
    [-3, 2, 4, 3],
    [0, 4, -1, 7],
    [4, 7, -2, 0],
    [11, 0, 6, 5],
    [5, -3, -2, -10],
    [1, -2, 1, -11],
    [-10, 3, -7, 4],
    [5, 0, 0, -1],
    [-6, -12, 6, 2],
    [-8, -6, 3, -7],
    [10, 2, -6, -8],
    [5, -9, -2, -6],
    [-5, -7, 2, -5],
];
