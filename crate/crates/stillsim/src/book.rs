// Doc-test bridge for the guide; chapters are included once written.
