"""Status codes shared by the compiled and pure-Python kernel backends."""

OK = 0
TANGENT = 1          # a hit fails the transversality margin (or grazing contact)
APEX = 2             # an intersection lands below the apex cutoff
ESCAPED = 3          # no forward exit: the line leaves to infinity inside the cone
OUTSIDE = 4          # the line does not meet the cone at all
MAX_REFLECTIONS = 5  # trace hit the reflection cap
INTERNAL = 6         # intersection bookkeeping failed (should not happen)
DOMAIN = 7           # evaluation outside the function's domain (e.g. radial axis)

NAMES = {
    OK: "ok",
    TANGENT: "tangent",
    APEX: "apex",
    ESCAPED: "escaped",
    OUTSIDE: "outside",
    MAX_REFLECTIONS: "max-reflections",
    INTERNAL: "internal",
    DOMAIN: "domain",
}
