"""Hot inner loop of the pushing world.

JIT-compiled with numba when available; the same functions run as plain
Python otherwise (identical arithmetic, much slower).

State layout (float64[9]):
    0..2  robot pose x, y, theta (world)
    3..4  object COM position (world)
    5     object orientation
    6..7  object COM velocity
    8     object yaw rate

Friction (ground support points and the robot-contact tangential component)
is integrated as a linear implicit drag, two linearization sweeps per substep,
then projected onto the Coulomb cone.  The explicit regularized force at this
timestep/epsilon combination oscillates around rest; the implicit solve decays
cleanly to zero velocity while agreeing with saturated Coulomb when sliding.
"""
from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


TWO_PI = 2.0 * math.pi

# Diagnostics slots filled by advance()
DIAG_MAX_PEN = 0          # deepest penetration seen (m)
DIAG_CONE_EXCESS = 1      # max applied tangential force above mu*N (N); > 0 is a bug
DIAG_GROUND_EXCESS = 2    # max applied ground friction above its cap (N); > 0 is a bug
DIAG_ENERGY_RES = 3       # max per-substep KE gain unexplained by contact work (J)
DIAG_PROJECTIONS = 4      # cone projections triggered (linearization overshoots)
DIAG_NCP = 5              # manifold size after the last substep
DIAG_P0 = 6               # px, py, nx, ny, pen of point 0
DIAG_P1 = 11              # same for point 1
DIAG_NORMAL_SUM = 16      # sum of normal force magnitudes, last substep
DIAG_GROUND_WRENCH = 17   # fx, fy, torque of ground friction, last substep
DIAG_CONTACT_WRENCH = 20  # fx, fy, torque of robot contact forces, last substep
DIAG_SIZE = 23


@njit(cache=True)
def _clip_segment(ax, ay, bx, by, nx, ny, off):
    """Clip segment to the half-plane n.p <= off. Returns (count, x0, y0, x1, y1)."""
    da = nx * ax + ny * ay - off
    db = nx * bx + ny * by - off
    if da <= 0.0 and db <= 0.0:
        return 2, ax, ay, bx, by
    if da > 0.0 and db > 0.0:
        return 0, 0.0, 0.0, 0.0, 0.0
    t = da / (da - db)
    cx = ax + t * (bx - ax)
    cy = ay + t * (by - ay)
    if da <= 0.0:
        return 2, ax, ay, cx, cy
    return 2, cx, cy, bx, by


@njit(cache=True)
def _poly_manifold(lx, ly, hl, hw):
    """Contact manifold of a convex polygon against the rect [-hl,hl]x[-hw,hw].

    The polygon is given in the rectangle's frame.  Returns
    (count, p0x, p0y, pen0, p1x, p1y, pen1, nx, ny) with the normal pointing
    from the rectangle into the polygon.
    """
    nv = lx.shape[0]

    # Least-penetration axis over the rectangle's faces.
    minx = lx[0]
    maxx = lx[0]
    miny = ly[0]
    maxy = ly[0]
    for i in range(1, nv):
        if lx[i] < minx:
            minx = lx[i]
        if lx[i] > maxx:
            maxx = lx[i]
        if ly[i] < miny:
            miny = ly[i]
        if ly[i] > maxy:
            maxy = ly[i]
    best_a = minx - hl
    face_a = 0
    s = -maxx - hl
    if s > best_a:
        best_a = s
        face_a = 1
    s = miny - hw
    if s > best_a:
        best_a = s
        face_a = 2
    s = -maxy - hw
    if s > best_a:
        best_a = s
        face_a = 3

    # Least-penetration axis over the polygon's faces.
    best_b = -1.0e300
    face_b = 0
    bnx = 0.0
    bny = 0.0
    for i in range(nv):
        j = i + 1 if i + 1 < nv else 0
        ex = lx[j] - lx[i]
        ey = ly[j] - ly[i]
        ln = math.sqrt(ex * ex + ey * ey)
        if ln < 1e-12:
            continue
        nx = ey / ln
        ny = -ex / ln
        off = nx * lx[i] + ny * ly[i]
        s = -(abs(nx) * hl + abs(ny) * hw) - off
        if s > best_b:
            best_b = s
            face_b = i
            bnx = nx
            bny = ny

    if best_a > 0.0 or best_b > 0.0:
        return 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0

    if best_b > best_a + 1e-10:
        # Reference face on the polygon; incident face on the rectangle.
        refnx = bnx
        refny = bny
        refoff = refnx * lx[face_b] + refny * ly[face_b]
        j = face_b + 1 if face_b + 1 < nv else 0
        r1x, r1y = lx[face_b], ly[face_b]
        r2x, r2y = lx[j], ly[j]
        # Rect face with normal most opposed to the reference normal.
        d0 = refnx
        d1 = -refnx
        d2 = refny
        d3 = -refny
        best = d0
        inc = 0
        if d1 < best:
            best = d1
            inc = 1
        if d2 < best:
            best = d2
            inc = 2
        if d3 < best:
            best = d3
            inc = 3
        if inc == 0:
            iax, iay, ibx, iby = hl, -hw, hl, hw
        elif inc == 1:
            iax, iay, ibx, iby = -hl, hw, -hl, -hw
        elif inc == 2:
            iax, iay, ibx, iby = hl, hw, -hl, hw
        else:
            iax, iay, ibx, iby = -hl, -hw, hl, -hw
        push = -1.0
    else:
        # Reference face on the rectangle; incident face on the polygon.
        if face_a == 0:
            refnx, refny, refoff = 1.0, 0.0, hl
            r1x, r1y, r2x, r2y = hl, -hw, hl, hw
        elif face_a == 1:
            refnx, refny, refoff = -1.0, 0.0, hl
            r1x, r1y, r2x, r2y = -hl, hw, -hl, -hw
        elif face_a == 2:
            refnx, refny, refoff = 0.0, 1.0, hw
            r1x, r1y, r2x, r2y = hl, hw, -hl, hw
        else:
            refnx, refny, refoff = 0.0, -1.0, hw
            r1x, r1y, r2x, r2y = -hl, -hw, hl, -hw
        best = 1.0e300
        inc = 0
        for i in range(nv):
            j = i + 1 if i + 1 < nv else 0
            ex = lx[j] - lx[i]
            ey = ly[j] - ly[i]
            ln = math.sqrt(ex * ex + ey * ey)
            if ln < 1e-12:
                continue
            d = (ey * refnx - ex * refny) / ln
            if d < best:
                best = d
                inc = i
        j = inc + 1 if inc + 1 < nv else 0
        iax, iay, ibx, iby = lx[inc], ly[inc], lx[j], ly[j]
        push = 1.0

    # Clip the incident segment between the reference face's side planes.
    tx = -refny
    ty = refnx
    s1 = tx * r1x + ty * r1y
    s2 = tx * r2x + ty * r2y
    smin = s1 if s1 < s2 else s2
    smax = s2 if s1 < s2 else s1
    cnt, iax, iay, ibx, iby = _clip_segment(iax, iay, ibx, iby, tx, ty, smax)
    if cnt == 0:
        return 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    cnt, iax, iay, ibx, iby = _clip_segment(iax, iay, ibx, iby, -tx, -ty, -smin)
    if cnt == 0:
        return 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0

    out_n = 0
    p0x = p0y = pe0 = p1x = p1y = pe1 = 0.0
    sep = refnx * iax + refny * iay - refoff
    if sep <= 0.0:
        p0x, p0y, pe0 = iax, iay, -sep
        out_n = 1
    sep = refnx * ibx + refny * iby - refoff
    if sep <= 0.0:
        if out_n == 0:
            p0x, p0y, pe0 = ibx, iby, -sep
            out_n = 1
        else:
            p1x, p1y, pe1 = ibx, iby, -sep
            out_n = 2
    return out_n, p0x, p0y, pe0, p1x, p1y, pe1, push * refnx, push * refny


@njit(cache=True)
def _disk_manifold(cx, cy, radius, hl, hw):
    """Disk against the rect; returns (count, px, py, pen, nx, ny), normal rect->disk."""
    qx = cx
    if qx > hl:
        qx = hl
    elif qx < -hl:
        qx = -hl
    qy = cy
    if qy > hw:
        qy = hw
    elif qy < -hw:
        qy = -hw
    if qx == cx and qy == cy:
        # Center inside the rectangle: push out through the nearest face.
        d0 = hl - cx
        d1 = cx + hl
        d2 = hw - cy
        d3 = cy + hw
        nx, ny, d = 1.0, 0.0, d0
        if d1 < d:
            nx, ny, d = -1.0, 0.0, d1
        if d2 < d:
            nx, ny, d = 0.0, 1.0, d2
        if d3 < d:
            nx, ny, d = 0.0, -1.0, d3
        pen = radius + d
        return 1, cx - nx * radius, cy - ny * radius, pen, nx, ny
    dx = cx - qx
    dy = cy - qy
    d2 = dx * dx + dy * dy
    if d2 >= radius * radius:
        return 0, 0.0, 0.0, 0.0, 0.0, 0.0
    d = math.sqrt(d2)
    nx = dx / d
    ny = dy / d
    return 1, cx - nx * radius, cy - ny * radius, radius - d, nx, ny


@njit(cache=True)
def advance(state, cmd, dt, n_sub, kind, verts, radius, com, mass, inertia,
            mu_g, mu_r, sup, supw, hl, hw, kn, cn, epsv, grav, diag):
    """Advance the world by n_sub fixed substeps under a constant base command.

    Mutates ``state`` in place and fills ``diag`` (see DIAG_* slots).  The
    robot tracks its commanded twist perfectly; the object integrates contact
    and ground-friction wrenches semi-implicitly.
    """
    nv = verts.shape[0]
    K = sup.shape[0]
    lx = np.empty(nv)
    ly = np.empty(nv)
    gax = np.empty(K)
    gay = np.empty(K)
    cg = np.empty(K)
    mpx = np.empty(2)
    mpy = np.empty(2)
    mpen = np.empty(2)
    mN = np.empty(2)
    marx = np.empty(2)
    mary = np.empty(2)
    murx = np.empty(2)
    mury = np.empty(2)
    cc = np.empty(2)
    comx = com[0]
    comy = com[1]

    for it in range(n_sub):
        rx = state[0]
        ry = state[1]
        rth = state[2]
        ox = state[3]
        oy = state[4]
        oth = state[5]
        vx = state[6]
        vy = state[7]
        w = state[8]
        cr = math.cos(rth)
        sr = math.sin(rth)
        co = math.cos(oth)
        so = math.sin(oth)
        rvx = cr * cmd[0] - sr * cmd[1]
        rvy = sr * cmd[0] + cr * cmd[1]
        rw = cmd[2]

        # Contact manifold, computed in the robot's frame.
        if kind == 0:
            for i in range(nv):
                bx = verts[i, 0] - comx
                by = verts[i, 1] - comy
                wxv = ox + co * bx - so * by
                wyv = oy + so * bx + co * by
                dx0 = wxv - rx
                dy0 = wyv - ry
                lx[i] = cr * dx0 + sr * dy0
                ly[i] = -sr * dx0 + cr * dy0
            ncp, p0x, p0y, pe0, p1x, p1y, pe1, nlx, nly = _poly_manifold(lx, ly, hl, hw)
        else:
            ccx = ox - (co * comx - so * comy)
            ccy = oy - (so * comx + co * comy)
            dx0 = ccx - rx
            dy0 = ccy - ry
            clx = cr * dx0 + sr * dy0
            cly = -sr * dx0 + cr * dy0
            ncp, p0x, p0y, pe0, nlx, nly = _disk_manifold(clx, cly, radius, hl, hw)
            p1x = 0.0
            p1y = 0.0
            pe1 = 0.0

        # To world frame.
        nwx = cr * nlx - sr * nly
        nwy = sr * nlx + cr * nly
        mpx[0] = rx + cr * p0x - sr * p0y
        mpy[0] = ry + sr * p0x + cr * p0y
        mpen[0] = pe0
        mpx[1] = rx + cr * p1x - sr * p1y
        mpy[1] = ry + sr * p1x + cr * p1y
        mpen[1] = pe1

        # Penalty normal forces.
        GNx = 0.0
        GNy = 0.0
        GNt = 0.0
        nsum = 0.0
        for j in range(ncp):
            ax = mpx[j] - ox
            ay = mpy[j] - oy
            marx[j] = ax
            mary[j] = ay
            bx2 = mpx[j] - rx
            by2 = mpy[j] - ry
            urx = rvx - rw * by2
            ury = rvy + rw * bx2
            murx[j] = urx
            mury[j] = ury
            uox = vx - w * ay
            uoy = vy + w * ax
            pen_rate = -((uox - urx) * nwx + (uoy - ury) * nwy)
            Nj = kn * mpen[j] + cn * pen_rate
            if Nj < 0.0:
                Nj = 0.0
            mN[j] = Nj
            nsum += Nj
            GNx += Nj * nwx
            GNy += Nj * nwy
            GNt += ax * (Nj * nwy) - ay * (Nj * nwx)

        q0 = vx + dt * GNx / mass
        q1 = vy + dt * GNy / mass
        q2 = w + dt * GNt / inertia

        # Ground support arms (world frame), fixed within the substep.
        for k in range(K):
            sbx = sup[k, 0] - comx
            sby = sup[k, 1] - comy
            gax[k] = co * sbx - so * sby
            gay[k] = so * sbx + co * sby

        twx = -nwy
        twy = nwx
        l0 = q0
        l1 = q1
        l2 = q2
        for sweep in range(2):
            A00 = 0.0
            A01 = 0.0
            A02 = 0.0
            A11 = 0.0
            A12 = 0.0
            A22 = 0.0
            r0e = 0.0
            r1e = 0.0
            r2e = 0.0
            for k in range(K):
                gx = gax[k]
                gy = gay[k]
                ux = l0 - l2 * gy
                uy = l1 + l2 * gx
                spd = math.sqrt(ux * ux + uy * uy)
                if spd < epsv:
                    spd = epsv
                c = mu_g * mass * grav * supw[k] / spd
                cg[k] = c
                A00 += c
                A11 += c
                A02 += -c * gy
                A12 += c * gx
                A22 += c * (gx * gx + gy * gy)
            for j in range(ncp):
                if mN[j] <= 0.0:
                    cc[j] = 0.0
                    continue
                ax = marx[j]
                ay = mary[j]
                uox = l0 - l2 * ay
                uoy = l1 + l2 * ax
                wrel = (uox - murx[j]) * twx + (uoy - mury[j]) * twy
                aw = abs(wrel)
                if aw < epsv:
                    aw = epsv
                c = mu_r * mN[j] / aw
                cc[j] = c
                g2 = ax * twy - ay * twx
                A00 += c * twx * twx
                A01 += c * twx * twy
                A02 += c * twx * g2
                A11 += c * twy * twy
                A12 += c * twy * g2
                A22 += c * g2 * g2
                tur = twx * murx[j] + twy * mury[j]
                r0e += c * tur * twx
                r1e += c * tur * twy
                r2e += c * tur * g2
            B00 = mass + dt * A00
            B01 = dt * A01
            B02 = dt * A02
            B11 = mass + dt * A11
            B12 = dt * A12
            B22 = inertia + dt * A22
            rr0 = mass * q0 + dt * r0e
            rr1 = mass * q1 + dt * r1e
            rr2 = inertia * q2 + dt * r2e
            c00 = B11 * B22 - B12 * B12
            c01 = B02 * B12 - B01 * B22
            c02 = B01 * B12 - B02 * B11
            c11 = B00 * B22 - B02 * B02
            c12 = B01 * B02 - B00 * B12
            c22 = B00 * B11 - B01 * B01
            det = B00 * c00 + B01 * c01 + B02 * c02
            l0 = (c00 * rr0 + c01 * rr1 + c02 * rr2) / det
            l1 = (c01 * rr0 + c11 * rr1 + c12 * rr2) / det
            l2 = (c02 * rr0 + c12 * rr1 + c22 * rr2) / det

        # Applied friction forces at the solved velocity, projected onto the cone.
        Ggx = 0.0
        Ggy = 0.0
        Ggt = 0.0
        for k in range(K):
            gx = gax[k]
            gy = gay[k]
            ux = l0 - l2 * gy
            uy = l1 + l2 * gx
            fx = -cg[k] * ux
            fy = -cg[k] * uy
            mag = math.sqrt(fx * fx + fy * fy)
            cap = mu_g * mass * grav * supw[k]
            if mag > cap:
                s = cap / mag
                fx *= s
                fy *= s
                diag[DIAG_PROJECTIONS] += 1.0
            exc = math.sqrt(fx * fx + fy * fy) - cap
            if exc > diag[DIAG_GROUND_EXCESS]:
                diag[DIAG_GROUND_EXCESS] = exc
            Ggx += fx
            Ggy += fy
            Ggt += gx * fy - gy * fx
        Gtx = 0.0
        Gty = 0.0
        Gtt = 0.0
        for j in range(ncp):
            if mN[j] <= 0.0:
                continue
            ax = marx[j]
            ay = mary[j]
            uox = l0 - l2 * ay
            uoy = l1 + l2 * ax
            wrel = (uox - murx[j]) * twx + (uoy - mury[j]) * twy
            ft = -cc[j] * wrel
            cap = mu_r * mN[j]
            if abs(ft) > cap:
                ft = cap if ft > 0.0 else -cap
                diag[DIAG_PROJECTIONS] += 1.0
            exc = abs(ft) - cap
            if exc > diag[DIAG_CONE_EXCESS]:
                diag[DIAG_CONE_EXCESS] = exc
            fx = ft * twx
            fy = ft * twy
            Gtx += fx
            Gty += fy
            Gtt += ax * fy - ay * fx

        f0 = q0 + dt * (Ggx + Gtx) / mass
        f1 = q1 + dt * (Ggy + Gty) / mass
        f2 = q2 + dt * (Ggt + Gtt) / inertia

        # Energy audit: KE growth must be explained by robot-contact work.
        ke0 = 0.5 * mass * (vx * vx + vy * vy) + 0.5 * inertia * w * w
        ke1 = 0.5 * mass * (f0 * f0 + f1 * f1) + 0.5 * inertia * f2 * f2
        wc = 0.5 * dt * ((GNx + Gtx) * (vx + f0) + (GNy + Gty) * (vy + f1)
                         + (GNt + Gtt) * (w + f2))
        res = ke1 - ke0 - wc
        if res > diag[DIAG_ENERGY_RES]:
            diag[DIAG_ENERGY_RES] = res
        for j in range(ncp):
            if mpen[j] > diag[DIAG_MAX_PEN]:
                diag[DIAG_MAX_PEN] = mpen[j]

        # Integrate poses (robot is kinematic, object semi-implicit).
        state[3] = ox + dt * f0
        state[4] = oy + dt * f1
        noth = oth + dt * f2
        if noth >= math.pi:
            noth -= TWO_PI
        elif noth < -math.pi:
            noth += TWO_PI
        state[5] = noth
        state[6] = f0
        state[7] = f1
        state[8] = f2
        state[0] = rx + dt * rvx
        state[1] = ry + dt * rvy
        nrth = rth + dt * rw
        if nrth >= math.pi:
            nrth -= TWO_PI
        elif nrth < -math.pi:
            nrth += TWO_PI
        state[2] = nrth

        # Last-substep snapshot for traces.
        diag[DIAG_NCP] = float(ncp)
        diag[DIAG_P0] = mpx[0]
        diag[DIAG_P0 + 1] = mpy[0]
        diag[DIAG_P0 + 2] = nwx
        diag[DIAG_P0 + 3] = nwy
        diag[DIAG_P0 + 4] = mpen[0] if ncp > 0 else 0.0
        diag[DIAG_P1] = mpx[1]
        diag[DIAG_P1 + 1] = mpy[1]
        diag[DIAG_P1 + 2] = nwx
        diag[DIAG_P1 + 3] = nwy
        diag[DIAG_P1 + 4] = mpen[1] if ncp > 1 else 0.0
        diag[DIAG_NORMAL_SUM] = nsum
        diag[DIAG_GROUND_WRENCH] = Ggx
        diag[DIAG_GROUND_WRENCH + 1] = Ggy
        diag[DIAG_GROUND_WRENCH + 2] = Ggt
        diag[DIAG_CONTACT_WRENCH] = GNx + Gtx
        diag[DIAG_CONTACT_WRENCH + 1] = GNy + Gty
        diag[DIAG_CONTACT_WRENCH + 2] = GNt + Gtt
