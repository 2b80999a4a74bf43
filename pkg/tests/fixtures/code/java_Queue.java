import java.util.NoSuchElementException;

public class Queue<T> {
	private static class Node<T> {
		T value;
		Node<T> next;

		Node(T value) {
			this.value = value;
		}
	}

	private Node<T> head, tail;
	private int size;

	public void enqueue(T value) {
		Node<T> n = new Node<>(value);
		if (tail == null) {
			head = tail = n;
		} else {
			tail.next = n;
			tail = n;
		}
		size++;
	}

	public T dequeue() {
		if (head == null) throw new NoSuchElementException();
		T v = head.value;
		head = head.next;
		if (head == null) tail = null;
		size--;
		return v;
	}

	public int size() {
		return size;
	}
}
