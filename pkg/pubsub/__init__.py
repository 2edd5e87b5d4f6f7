"""ROS1-style computation graph: topic registry plus publisher/subscriber nodes."""
