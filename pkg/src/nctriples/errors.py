"""Exception hierarchy.

Every error raised by the library derives from :class:`NCTriplesError`, so the
CLI can map input problems onto exit code 2 with a single ``except``.
"""


class NCTriplesError(Exception):
    """Base class for all library errors."""


class InputError(NCTriplesError, ValueError):
    """Malformed or inconsistent user input."""


# groups
class NonAssociative(InputError):
    def __init__(self, witness):
        super().__init__(f"multiplication table is not associative at {witness}")
        self.witness = witness


class MissingInverse(InputError):
    def __init__(self, element):
        super().__init__(f"element {element!r} has no inverse")
        self.element = element


class BadIdentity(InputError):
    pass


class EmptyGeneratorSet(InputError):
    pass


class RadiusOverflow(NCTriplesError):
    def __init__(self, cap, radius):
        super().__init__(f"ball of radius {radius} exceeds the element cap {cap}")
        self.cap = cap
        self.radius = radius


class NotAHomomorphism(InputError):
    def __init__(self, witness):
        super().__init__(f"map is not a homomorphism; witness pair {witness}")
        self.witness = witness


class OrderViolation(InputError):
    def __init__(self, generator, order):
        super().__init__(
            f"image of generator {generator!r} does not have order dividing {order}"
        )
        self.generator = generator
        self.order = order


class NotEpimorphism(NCTriplesError):
    pass


class InfiniteGroup(NCTriplesError):
    pass


# weights
class KindMismatch(InputError):
    pass


class PartialTable(InputError):
    pass


class ProbeOutsideBall(InputError):
    pass


class NotNormal(InputError):
    def __init__(self, witness):
        super().__init__(f"subgroup is not normal; witness {witness}")
        self.witness = witness


class NotALength(InputError):
    pass


class InfiniteFiberSearch(NCTriplesError):
    pass


# algebra
class GroupMismatch(InputError):
    pass


class AntilinearUnsupported(NCTriplesError):
    pass


class DimensionTooLarge(NCTriplesError):
    pass


# triple
class ElementOutsideBall(InputError):
    pass


class DepthTooLarge(InputError):
    pass


class NonPositiveT(InputError):
    pass


class NoValidRealStructure(NCTriplesError):
    pass


# category / functor
class DimensionMismatch(InputError):
    pass


class NotSpectral(NCTriplesError):
    pass


class MissingStructure(NCTriplesError):
    pass


class NotComposable(InputError):
    pass


class NotHomInduced(NCTriplesError):
    pass


class DegreeMismatch(InputError):
    pass


class NotSpectralWeight(NotSpectral):
    pass


class NotMono(NCTriplesError):
    pass


class NotWeighted(NCTriplesError):
    pass


class TargetBallTooSmall(NCTriplesError):
    pass
