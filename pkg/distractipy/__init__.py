"""Driver distraction detection from RGB-D driving sessions."""
