"""How the taxel strip sees different contacts.

Places a box against the robot base in a few characteristic poses and shows
which taxels fire and where the contact gets localized: a flush face (line
contact), a poking corner (point contact), a contact wrapped around a base
corner, and a contact sliding outward into the critical region.
"""
import math

from pushbench.geometry import Pose2D
from pushbench.objects import PolygonFootprint, rect_vertices
from pushbench.tactile import localize_contact, make_taxel_array, sample_taxels

array = make_taxel_array()
HL, HW = array.half_length, array.half_width
box = PolygonFootprint(rect_vertices(0.2, 0.2))


def ascii_strip(active):
    """Front edge as 24 cells, right to left; * marks an active taxel."""
    cells = ["*" if i in active else "." for i in range(24)]
    sides = [i for i in active if i >= 24]
    side_note = f"  (+{len(sides)} side taxels)" if sides else ""
    return "".join(cells) + side_note


scenes = {
    "flush face, centered": Pose2D(HL - 0.001 + 0.2, 0.0, 0.0),
    "flush face, shifted left": Pose2D(HL - 0.001 + 0.2, 0.15, 0.0),
    "corner poke near center": Pose2D(HL - 0.002 + 0.2 * math.sqrt(2), 0.03, math.pi / 4),
    "contact wrapping the front-left corner": Pose2D(HL - 0.002 + 0.2, 0.28, 0.0),
    "deep in the critical region": Pose2D(HL - 0.001 + 0.2, 0.26, 0.0),
}

print(f"{len(array)} taxels: 24 front + 9 left + 9 right, "
      f"activation threshold {array.threshold * 1000:.1f} mm\n")
for name, pose in scenes.items():
    active = sample_taxels(Pose2D(), box, pose, array)
    report = localize_contact(active, array)
    print(name)
    print("  front strip:", ascii_strip(set(active)))
    if report.exists:
        kind = report.kind.value
        print(f"  -> {kind} contact at ({report.point.x:+.3f}, {report.point.y:+.3f}),"
              f" lateral offset {report.lateral:+.3f} m"
              + ("  [critical: would trigger realignment]"
                 if abs(report.lateral) > 0.24 else ""))
    else:
        print("  -> no contact")
    print()
