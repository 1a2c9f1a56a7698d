#pragma once

// Versioned text assets shipped with the library: extraction prompt
// templates, the default generation instruction, and the English stopword
// list. These are byte-exact interfaces; edits change golden outputs.

#include <string_view>

namespace sarg::assets {

inline constexpr std::string_view kReasoningExtractionPromptTemplate =
    R"PROMPT(You are an expert at extracting reasoning-relevant relationships from text. Your task is to identify meaningful connections between entities, events, concepts, and time periods.

Relationship Schema
Extract relationships that fall into the following categories:

1. Causal & Dependency (Implicit & Explicit)
- Rule: If "X happened mainly because Y", extract: [Y] | caused | [X]
- Rule: Extract the chain of events: [Event A] | led to | [Event B]

2. Spatial & Setting
- Rule: Extract bidirectional geographic relations: [County A] | borders | [County B]
- Rule: Link entities to their operational setting: [Character] | works in | [City]

3. Temporal & Comparative
- Rule: Treat dates (years, decades) as explicit entities.
- Rule: Extract life events: [Person] | birth year | [1950]
- Rule: Infer comparisons: If A (1950) and B (1960), extract: [A] | is older than | [B]

Output Constraints
1. Self-Contained Nodes: You must resolve all pronouns. Never use "he", "she", "it", "this", or "that". Replace them with the specific entity name.
   - Bad: [It] | caused | [the crash]
   - Good: [The housing bubble] | caused | [the crash]
2. Bidirectionality: For spatial relations, extract both directions if logical.
3. Format: Output strictly as: Cause | Relation | Effect

Examples

Input: "The coastal regions experienced flooding, mainly because sea levels rose significantly during the storm period. Several cities including Port City were affected."
Output:
sea levels rising significantly | caused | coastal regions to experience flooding
sea levels rising significantly | caused | Port City to be affected
storm period | was when | sea levels rose significantly
Port City | was flooded during | storm period

Your Task
Text: {text}
Output:)PROMPT";

// Generic subject-predicate-object variant, selected by configuration for
// the schema ablation. No reasoning-schema constraints.
inline constexpr std::string_view kSpoExtractionPromptTemplate =
    R"PROMPT(You are an expert at extracting factual relationships from text. Your task is to identify every subject-predicate-object relation, including attributes, categories, and descriptive facts.

Instructions
1. Extract all factual relations, including attributive facts such as [Entity] | is a | [Category] and [Entity] | has | [Property].
2. Resolve pronouns to the specific entity name.
3. Format: Output strictly as: Subject | Predicate | Object

Example

Input: "The coastal regions experienced flooding, mainly because sea levels rose significantly during the storm period. Several cities including Port City were affected."
Output:
coastal regions | experienced | flooding
sea levels | rose during | storm period
Port City | is a | city
Port City | was | affected
flooding | occurred in | coastal regions

Your Task
Text: {text}
Output:)PROMPT";

// Default generation instruction prepended to every compiled prompt.
inline constexpr std::string_view kDefaultInstruction =
    "You are a careful reasoning assistant. Answer the question using only the evidence "
    "provided below. Follow the reasoning chains step by step: each chain lists "
    "cause-to-effect links recovered from the evidence. Ground every claim in the evidence "
    "documents, cite the bracketed document ids you rely on, and state the final answer "
    "plainly.";

// Fallback sentence rendered in place of the chains block when traversal
// produced nothing (the flat-RAG degradation path).
inline constexpr std::string_view kNoChainsFallback = "No reasoning chains were found.";

// English stopwords, one word per line (179 entries).
inline constexpr std::string_view kStopwordsEn = R"WORDS(i
me
my
myself
we
our
ours
ourselves
you
you're
you've
you'll
you'd
your
yours
yourself
yourselves
he
him
his
himself
she
she's
her
hers
herself
it
it's
its
itself
they
them
their
theirs
themselves
what
which
who
whom
this
that
that'll
these
those
am
is
are
was
were
be
been
being
have
has
had
having
do
does
did
doing
a
an
the
and
but
if
or
because
as
until
while
of
at
by
for
with
about
against
between
into
through
during
before
after
above
below
to
from
up
down
in
out
on
off
over
under
again
further
then
once
here
there
when
where
why
how
all
any
both
each
few
more
most
other
some
such
no
nor
not
only
own
same
so
than
too
very
s
t
can
will
just
don
don't
should
should've
now
d
ll
m
o
re
ve
y
ain
aren
aren't
couldn
couldn't
didn
didn't
doesn
doesn't
hadn
hadn't
hasn
hasn't
haven
haven't
isn
isn't
ma
mightn
mightn't
mustn
mustn't
needn
needn't
shan
shan't
shouldn
shouldn't
wasn
wasn't
weren
weren't
won
won't
wouldn
wouldn't)WORDS";

} // namespace sarg::assets
