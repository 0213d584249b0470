# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same contract as ``_purepy``; selected by ``kernels``."""

from libc.stdlib cimport malloc, free, qsort
from libc.string cimport strncmp

cdef enum:
    IN_APP = 0
    OBFUSCATED = 1
    LIBRARY = 2
    OTHER = 3
    MALFORMED = -1


cdef struct Item:
    const char* s
    Py_ssize_t n
    Py_ssize_t idx


cdef int _segment_cmp(const void* a, const void* b) noexcept nogil:
    # Byte compare with '.' ranked just above NUL, i.e. segment-list order.
    cdef const unsigned char* s = <const unsigned char*>(<Item*>a).s
    cdef const unsigned char* t = <const unsigned char*>(<Item*>b).s
    cdef unsigned char c, d
    while True:
        c = s[0]
        d = t[0]
        if c == d:
            if c == 0:
                return 0
            s += 1
            t += 1
            continue
        if c == 46:
            c = 1
        if d == 46:
            d = 1
        return (c > d) - (c < d)


def prune_covered(names):
    cdef list unique = list(set(names))
    cdef Py_ssize_t n = len(unique)
    cdef list encoded = [u.encode("utf-8") for u in unique]
    cdef Item* items = <Item*>malloc(n * sizeof(Item) if n else sizeof(Item))
    cdef Py_ssize_t i, last, ln
    cdef bytes b
    cdef list kept = []
    cdef list removed = []
    if items == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            b = encoded[i]
            items[i].s = b
            items[i].n = len(b)
            items[i].idx = i
        qsort(items, n, sizeof(Item), _segment_cmp)
        last = -1
        for i in range(n):
            if last >= 0:
                ln = items[last].n
                if (items[i].n > ln and items[i].s[ln] == 46
                        and strncmp(items[i].s, items[last].s, ln) == 0):
                    removed.append((unique[items[i].idx], unique[items[last].idx]))
                    continue
            kept.append(unique[items[i].idx])
            last = i
    finally:
        free(items)
    return kept, removed


cdef bint _is_covered(str name, entries) except -1:
    cdef Py_ssize_t i, n = len(name)
    cdef Py_UCS4 ch
    if name in entries:
        return True
    for i in range(n):
        ch = name[i]
        if ch == u'.' and name[:i] in entries:
            return True
    return False


def is_covered(str name, entries):
    return _is_covered(name, entries)


def covered_mask(names, entries):
    cdef str name
    return [_is_covered(name, entries) for name in names]


cdef inline bint _is_letter(Py_UCS4 ch):
    return (u'a' <= ch <= u'z') or (u'A' <= ch <= u'Z')


cdef inline bint _is_segment_char(Py_UCS4 ch):
    return _is_letter(ch) or (u'0' <= ch <= u'9') or ch == u'_' or ch == u'-'


cdef int _classify(str fqcn, str app_package, str app_prefix, entries) except -2:
    cdef Py_ssize_t n, i, last_dot = -1, first_dot = -1, seg_len = 0
    cdef Py_UCS4 ch
    cdef str pkg
    fqcn = fqcn.strip()
    n = len(fqcn)
    if n == 0:
        return MALFORMED
    for i in range(n):
        ch = fqcn[i]
        if ch == u'.':
            if first_dot == -1:
                first_dot = i
            last_dot = i
    if last_dot == -1:
        pkg = ""
    else:
        # Package part: segments of [A-Za-z0-9_-], none empty.
        for i in range(last_dot + 1):
            ch = fqcn[i]
            if ch == u'.':
                if seg_len == 0:
                    return MALFORMED
                seg_len = 0
            elif _is_segment_char(ch):
                seg_len += 1
            else:
                return MALFORMED
        pkg = fqcn[:last_dot]
    if last_dot == n - 1:
        return MALFORMED
    for i in range(last_dot + 1, n):
        if fqcn[i].isspace():
            return MALFORMED
    if last_dot != -1 and (pkg == app_package or pkg.startswith(app_prefix)):
        return IN_APP
    if first_dot == 1 or (first_dot == -1 and n == 1):
        if _is_letter(fqcn[0]):
            return OBFUSCATED
    if n - last_dot - 1 == 1 and _is_letter(fqcn[n - 1]):
        return OBFUSCATED
    if last_dot != -1 and _is_covered(pkg, entries):
        return LIBRARY
    return OTHER


def classify_one(str fqcn, str app_package, entries):
    return _classify(fqcn, app_package, app_package + ".", entries)


def classify_many(fqcns, str app_package, entries):
    cdef str prefix = app_package + "."
    cdef str f
    return [_classify(f, app_package, prefix, entries) for f in fqcns]


def field_stats(names):
    cdef dict roots = {}
    cdef dict hist = {}
    cdef dict with_roots = {}
    cdef dict without_roots = {}
    cdef str name, root, seg
    cdef list segs
    cdef Py_ssize_t k, i
    for name in names:
        segs = name.split(".")
        k = len(segs)
        hist[k] = hist.get(k, 0) + 1
        root = segs[0]
        roots[root] = roots.get(root, 0) + 1
        with_roots[root] = with_roots.get(root, 0) + 1
        for i in range(1, k):
            seg = segs[i]
            with_roots[seg] = with_roots.get(seg, 0) + 1
            without_roots[seg] = without_roots.get(seg, 0) + 1
    return roots, hist, with_roots, without_roots
