"""Pure-numpy kernel backend.

Reference implementations of the hot kernels. Semantics are shared with the
compiled backend in ``_native.pyx``: float32 or float64 arrays in, same dtype
out, all reductions accumulated in float64 with a fixed order so repeated runs
are bit-identical.
"""

import numpy as np
from numpy.lib.stride_tricks import as_strided

NAME = "python"


def _check_real(a):
    if a.dtype not in (np.float32, np.float64):
        raise TypeError(f"expected float32/float64 array, got {a.dtype}")


def _im2col(xp, kh, kw, stride, oh, ow):
    # View of all kh*kw patches; xp is the zero-padded input (N,C,Hp,Wp).
    n, c, hp, wp = xp.shape
    sn, sc, sh, sw = xp.strides
    shape = (n, c, kh, kw, oh, ow)
    strides = (sn, sc, sh, sw, sh * stride, sw * stride)
    return as_strided(xp, shape=shape, strides=strides)


def conv2d_forward(x, k, b, stride, pad):
    _check_real(x)
    n, c, h, w = x.shape
    f, _, kh, kw = k.shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = _im2col(xp, kh, kw, stride, oh, ow)
    cols = cols.astype(np.float64).reshape(n, c * kh * kw, oh * ow)
    kmat = k.astype(np.float64).reshape(f, c * kh * kw)
    y = np.matmul(kmat, cols)
    y += b.astype(np.float64)[:, None]
    return y.reshape(n, f, oh, ow).astype(x.dtype)


def conv2d_backward(x, k, stride, pad, gy):
    n, c, h, w = x.shape
    f, _, kh, kw = k.shape
    _, _, oh, ow = gy.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = _im2col(xp, kh, kw, stride, oh, ow)
    cols = cols.astype(np.float64).reshape(n, c * kh * kw, oh * ow)
    g = gy.astype(np.float64).reshape(n, f, oh * ow)

    gb = g.sum(axis=(0, 2))
    gk = np.zeros((f, c * kh * kw), dtype=np.float64)
    for i in range(n):  # fixed accumulation order over the batch
        gk += g[i] @ cols[i].T

    kmat = k.astype(np.float64).reshape(f, c * kh * kw)
    gcols = np.matmul(kmat.T, g)  # (n, c*kh*kw, oh*ow)
    gcols = gcols.reshape(n, c, kh, kw, oh, ow)
    gxp = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=np.float64)
    for ki in range(kh):
        for kj in range(kw):
            gxp[:, :, ki:ki + oh * stride:stride, kj:kj + ow * stride:stride] += \
                gcols[:, :, ki, kj]
    gx = gxp[:, :, pad:pad + h, pad:pad + w]
    return gx.astype(x.dtype), gk.reshape(k.shape).astype(x.dtype), gb.astype(x.dtype)


def _bilinear_parts(img, flow):
    n, c, h, w = img.shape
    xs = np.arange(w, dtype=np.float64) + flow[:, 0].astype(np.float64)
    ys = np.arange(h, dtype=np.float64)[:, None] + flow[:, 1].astype(np.float64)
    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    corners = []
    for dy in (0, 1):
        for dx in (0, 1):
            cx = x0 + dx
            cy = y0 + dy
            valid = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
            cxc = np.clip(cx, 0, w - 1)
            cyc = np.clip(cy, 0, h - 1)
            wgt = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            corners.append((cxc, cyc, valid, wgt))
    return corners, fx, fy


def grid_sample_forward(img, flow):
    _check_real(img)
    n, c, h, w = img.shape
    corners, _, _ = _bilinear_parts(img, flow)
    img64 = img.astype(np.float64)
    out = np.zeros((n, c, h, w), dtype=np.float64)
    ns = np.arange(n)[:, None, None]
    for cxc, cyc, valid, wgt in corners:
        vals = img64[ns, :, cyc, cxc]              # (n, h, w, c)
        vals *= (wgt * valid)[..., None]
        out += vals.transpose(0, 3, 1, 2)
    return out.astype(img.dtype)


def grid_sample_backward(img, flow, gy):
    n, c, h, w = img.shape
    corners, fx, fy = _bilinear_parts(img, flow)
    img64 = img.astype(np.float64)
    g = gy.astype(np.float64)
    ns = np.arange(n)[:, None, None]

    gimg = np.zeros((n, c, h * w), dtype=np.float64)
    n_idx = np.arange(n)[:, None, None, None]
    c_idx = np.arange(c)[None, :, None, None]
    vals = []
    for cxc, cyc, valid, wgt in corners:
        v = img64[ns, :, cyc, cxc] * valid[..., None]      # (n, h, w, c)
        vals.append(v.transpose(0, 3, 1, 2))               # (n, c, h, w)
        contrib = g * (wgt * valid)[:, None]
        # Scatter-add in row-major index order (deterministic).
        np.add.at(gimg, (n_idx, c_idx, (cyc * w + cxc)[:, None]), contrib)
    gimg = gimg.reshape(n, c, h, w)

    v00, v01, v10, v11 = vals  # (dy,dx) = (0,0),(0,1),(1,0),(1,1)
    dx_s = (1.0 - fy)[:, None] * (v01 - v00) + fy[:, None] * (v11 - v10)
    dy_s = (1.0 - fx)[:, None] * (v10 - v00) + fx[:, None] * (v11 - v01)
    gflow = np.stack([(g * dx_s).sum(axis=1), (g * dy_s).sum(axis=1)], axis=1)
    return gimg.astype(img.dtype), gflow.astype(img.dtype)


def upsample2x_forward(x):
    _check_real(x)
    return x.repeat(2, axis=2).repeat(2, axis=3)


def upsample2x_backward(gy):
    n, c, h2, w2 = gy.shape
    g = gy.astype(np.float64).reshape(n, c, h2 // 2, 2, w2 // 2, 2)
    return g.sum(axis=(3, 5)).astype(gy.dtype)


def _sliding_sum(a, win, axis):
    # Moving window sum with zero padding, 'same' length, float64 cumsum.
    r = win // 2
    a = np.moveaxis(a, axis, -1)
    pad = [(0, 0)] * (a.ndim - 1) + [(r, r)]
    ap = np.pad(a, pad)
    cs = np.cumsum(ap, axis=-1, dtype=np.float64)
    zero = np.zeros(cs.shape[:-1] + (1,), dtype=np.float64)
    cs = np.concatenate([zero, cs], axis=-1)
    out = cs[..., win:] - cs[..., :-win]
    return np.moveaxis(out, -1, axis)


def box_filter(x, win):
    """win x win moving sum with zero padding; self-adjoint."""
    _check_real(x)
    out = _sliding_sum(x.astype(np.float64), win, axis=2)
    out = _sliding_sum(out, win, axis=3)
    return out.astype(x.dtype)


def warp_rigid(img, angle, tx, ty, nearest):
    """Inverse-mapped rigid resampling of a single (H,W) image, border zero."""
    _check_real(img)
    h, w = img.shape
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    ca = np.cos(-angle)
    sa = np.sin(-angle)
    xs = np.arange(w, dtype=np.float64) - cx - tx
    ys = np.arange(h, dtype=np.float64)[:, None] - cy - ty
    sx = ca * xs - sa * ys + cx
    sy = sa * xs + ca * ys + cy
    img64 = img.astype(np.float64)
    if nearest:
        ix = np.rint(sx).astype(np.int64)
        iy = np.rint(sy).astype(np.int64)
        valid = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
        out = np.where(valid, img64[np.clip(iy, 0, h - 1), np.clip(ix, 0, w - 1)], 0.0)
    else:
        x0 = np.floor(sx)
        y0 = np.floor(sy)
        fx = sx - x0
        fy = sy - y0
        x0 = x0.astype(np.int64)
        y0 = y0.astype(np.int64)
        out = np.zeros((h, w), dtype=np.float64)
        for dy in (0, 1):
            for dx in (0, 1):
                cxi = x0 + dx
                cyi = y0 + dy
                valid = (cxi >= 0) & (cxi < w) & (cyi >= 0) & (cyi < h)
                wgt = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
                out += wgt * valid * img64[np.clip(cyi, 0, h - 1), np.clip(cxi, 0, w - 1)]
    return out.astype(img.dtype)


def ncc_global(a, b):
    """Zero-mean global normalized cross-correlation of two same-shape grids."""
    a64 = a.astype(np.float64).ravel()
    b64 = b.astype(np.float64).ravel()
    am = a64 - a64.mean()
    bm = b64 - b64.mean()
    den = np.sqrt(np.dot(am, am) * np.dot(bm, bm))
    if den == 0.0:
        return 0.0
    return float(np.dot(am, bm) / den)


def rigid_scores(moving, fixed, cands):
    """Global NCC of bilinear-warped `moving` against `fixed` per candidate.

    cands is (K,3) float64 rows (angle, tx, ty); returns (K,) float64 scores.
    """
    out = np.empty(len(cands), dtype=np.float64)
    for i, (ang, tx, ty) in enumerate(cands):
        out[i] = ncc_global(warp_rigid(moving, ang, tx, ty, False), fixed)
    return out
